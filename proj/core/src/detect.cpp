#include "cusparity/detect.hpp"

#include "cusparity/continuation.hpp"
#include "cusparity/equilibria.hpp"
#include "cusparity/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cusparity {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

int sign_of(double v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

enum class Monitor { cusp, bt, fold_hopf };

// Real part of the complex pair (|Im| > gate) nearest to `target`, or the
// one nearest the imaginary axis when no target is given.
std::optional<std::complex<double>> monitored_pair(const Spectrum& sp, double gate,
                                                   const std::complex<double>* target = nullptr) {
    std::optional<std::complex<double>> best;
    for (auto l : sp.eigenvalues) {
        if (l.imag() <= gate) continue;
        const double score = target ? std::abs(l - *target) : std::abs(l.real());
        const double best_score = !best ? 0.0 : (target ? std::abs(*best - *target) : std::abs(best->real()));
        if (!best || score < best_score) best = l;
    }
    return best;
}

struct AugmentedResult {
    Vec u;
    double residual = std::numeric_limits<double>::infinity();
};

// Damped Newton on a square system with a finite-difference Jacobian.
// Returns the iterate with the smallest residual.
AugmentedResult solve_square(const ResidualFn& R, Vec u, double tol, int maxit) {
    AugmentedResult best{u, R(u).norm()};
    Vec r = R(u);
    double rn = r.norm();
    for (int it = 0; it < maxit && rn > tol; ++it) {
        Vec step;
        try {
            step = solve_linear(fd_jacobian(R, u, 1e-6), -r);
        } catch (const Error&) {
            break;
        }
        double lambda = 1.0;
        Vec trial = u + step;
        Vec rt = R(trial);
        for (int h = 0; h < 20 && !(rt.allFinite() && rt.norm() < rn); ++h) {
            lambda *= 0.5;
            trial = u + lambda * step;
            rt = R(trial);
        }
        if (!rt.allFinite() || rt.norm() >= rn) break;
        u = trial;
        r = rt;
        rn = r.norm();
        if (rn < best.residual) best = {u, rn};
    }
    return best;
}

Vec left_null_unit(const Mat& J, const Vec& q) {
    Vec p = real_eigenvector(J.transpose(), 0.0);
    if (p.dot(q) < 0) p = -p;
    return p;
}

} // namespace

StabilityClass classify_equilibrium(const Spectrum& s, double hyp_gate) {
    int unstable = 0;
    for (auto l : s.eigenvalues) {
        if (std::abs(l.real()) <= hyp_gate) return {Stability::nonhyperbolic, 0};
        unstable += l.real() > 0 ? 1 : 0;
    }
    if (unstable == 0) return {Stability::attractor, 0};
    return {Stability::saddle, unstable};
}

double fold_coefficient_a(const FamilySpec& f, const Vec& x, const Param& theta, const NullPair& np) {
    if (np.bt_flag) throw DegenerateNormalization("fold coefficient undefined: <p,q> below the BT gate");
    return 0.5 * np.p.dot(directional_B(f, x, theta, np.q, np.q));
}

double cusp_coefficient_c(const FamilySpec& f, const Vec& x, const Param& theta, const NullPair& np,
                          double cusp_gate) {
    if (np.bt_flag) throw DegenerateNormalization("cusp coefficient undefined: <p,q> below the BT gate");
    const int n = f.dim;
    const Vec& q = np.q;
    const Vec B = directional_B(f, x, theta, q, q);
    const Vec C = directional_C(f, x, theta, q, q, q);

    // w = J^+ B(q,q) restricted to q-orthogonal vectors.
    Mat M = Mat::Zero(n + 1, n + 1);
    M.topLeftCorner(n, n) = jacobian_x(f, x, theta);
    M.topRightCorner(n, 1) = np.p.normalized();
    M.bottomLeftCorner(1, n) = q.transpose();
    Vec rhs = Vec::Zero(n + 1);
    rhs.head(n) = B;
    const Vec w = solve_linear(M, rhs).head(n);

    const double c = np.p.dot(C - 3.0 * directional_B(f, x, theta, q, w)) / 6.0;
    if (std::abs(c) <= cusp_gate) throw DegenerateCusp("cubic coefficient " + std::to_string(c) + " below gate");
    return c;
}

TestFunctions test_functions(const FamilySpec& f, const Vec& x, const Vec& q, const Vec& p_unit, const Param& theta,
                             double hopf_gate) {
    TestFunctions t;
    t.cusp = 0.5 * p_unit.dot(directional_B(f, x, theta, q, q));
    t.bt = p_unit.dot(q);
    const auto pair = monitored_pair(spectrum(jacobian_x(f, x, theta)), hopf_gate);
    t.fold_hopf = pair ? pair->real() : nan;
    return t;
}

Vec transport_left_null(const Mat& J, const Vec& q, const Vec& p_ref) {
    return bordered_null_vectors(J, q, p_ref).p;
}

FoldPoint make_fold_point(const FamilySpec& f, const Vec& x, const Vec& q, const Param& theta, const Settings& s,
                          const Vec* p_ref) {
    const Mat J = jacobian_x(f, x, theta);
    FoldPoint fp;
    fp.x = x;
    fp.theta = theta;
    fp.p_unit = p_ref ? transport_left_null(J, q, *p_ref) : left_null_unit(J, q);

    NullPair& np = fp.nullpair;
    np.q = q;
    np.pq = fp.p_unit.dot(q);
    np.bt_flag = std::abs(np.pq) <= s.bt_gate;
    np.p = np.bt_flag ? fp.p_unit : Vec(fp.p_unit / np.pq);

    const TestFunctions t = test_functions(f, x, q, fp.p_unit, theta, s.hopf_gate);
    fp.psi_cusp = t.cusp;
    fp.psi_bt = t.bt;
    fp.psi_fh = t.fold_hopf;
    fp.a_coeff = np.bt_flag ? nan : 0.5 * np.p.dot(directional_B(f, x, theta, q, q));
    fp.orientation = sign_of(fp.psi_cusp);
    return fp;
}

std::vector<Codim2Point> classify_codim2(const FamilySpec& f, const FoldPoint& a, const FoldPoint& b,
                                         const Settings& s) {
    const int n = f.dim;
    const Vec ua = pack_fold(a.x, a.nullpair.q, a.theta);
    const Vec ub = pack_fold(b.x, b.nullpair.q, b.theta);
    std::vector<Codim2Point> out;

    auto bracket = [&](double va, double vb) { return std::isfinite(va) && std::isfinite(vb) && va * vb < 0; };

    for (Monitor m : {Monitor::cusp, Monitor::bt, Monitor::fold_hopf}) {
        double va = 0, vb = 0;
        switch (m) {
        case Monitor::cusp:
            va = a.psi_cusp, vb = b.psi_cusp;
            break;
        case Monitor::bt:
            va = a.psi_bt, vb = b.psi_bt;
            break;
        case Monitor::fold_hopf:
            va = a.psi_fh, vb = b.psi_fh;
            break;
        }
        if (!bracket(va, vb)) continue;

        const double t0 = va / (va - vb);
        Vec u0 = ua + t0 * (ub - ua);
        const Vec q0 = fold_direction(u0, n).normalized();
        u0.segment(n, n) = q0;

        std::complex<double> pair_ref{0.0, 0.0};
        if (m == Monitor::fold_hopf) {
            const auto pr = monitored_pair(spectrum(jacobian_x(f, fold_state(u0, n), fold_parameters(u0, n))),
                                           s.hopf_gate);
            if (!pr) throw RefinementFailed("fold-Hopf bracket lost its complex pair");
            pair_ref = *pr;
        }

        const Vec p_ref = a.p_unit;
        auto residual = [&](const Vec& u) {
            const Vec x = fold_state(u, n), q = fold_direction(u, n);
            const Param th = fold_parameters(u, n);
            Vec r(2 * n + 2);
            r.head(2 * n + 1) = fold_residual(f, x, q, th);
            const Mat J = jacobian_x(f, x, th);
            switch (m) {
            case Monitor::cusp: {
                const Vec p = transport_left_null(J, q, p_ref);
                r[2 * n + 1] = 0.5 * p.dot(directional_B(f, x, th, q, q));
                break;
            }
            case Monitor::bt:
                r[2 * n + 1] = transport_left_null(J, q, p_ref).dot(q);
                break;
            case Monitor::fold_hopf: {
                const auto pr = monitored_pair(spectrum(J), s.hopf_gate, &pair_ref);
                r[2 * n + 1] = pr ? pr->real() : nan;
                break;
            }
            }
            return r;
        };

        const AugmentedResult res = solve_square(residual, u0, s.newton_tol, 40);
        const double span = (ub - ua).norm();
        const double accept = std::max(s.newton_tol, s.cusp_gate);
        if (!(res.residual <= accept) || (res.u - u0).norm() > 2.0 * span + 1e-6) {
            throw RefinementFailed("refinement between arclength " + std::to_string(a.arclength) + " and " +
                                   std::to_string(b.arclength) + " left residual " +
                                   std::to_string(res.residual));
        }

        const Vec x = fold_state(res.u, n);
        const Vec q = fold_direction(res.u, n);
        const Param th = fold_parameters(res.u, n);
        const FoldPoint fp = make_fold_point(f, x, q, th, s, &p_ref);

        Codim2Point c;
        c.x = x;
        c.q = q;
        c.theta = th;
        c.pq = fp.psi_bt;
        c.residual = res.residual;
        const double along = (ub - ua).squaredNorm() > 0
                                 ? std::clamp((res.u - ua).dot(ub - ua) / (ub - ua).squaredNorm(), 0.0, 1.0)
                                 : 0.0;
        c.arclength = a.arclength + along * (b.arclength - a.arclength);

        switch (m) {
        case Monitor::cusp: {
            c.a_coeff = fp.a_coeff;
            c.c_coeff = cusp_coefficient_c(f, x, th, fp.nullpair, s.cusp_gate);
            const Codim2Kind by_coefficient = c.c_coeff < 0 ? Codim2Kind::cusp_standard : Codim2Kind::cusp_dual;
            c.kind = by_coefficient;
            c.classified_by = "coefficient";
            try {
                c.frame = cusp_frame(f, c, q, s);
                const SheetPattern pat = cusp_sheet_pattern(f, c, q, *c.frame, s);
                if (pat != SheetPattern::unknown) {
                    c.kind = pat == SheetPattern::standard ? Codim2Kind::cusp_standard : Codim2Kind::cusp_dual;
                    c.classified_by = "sheets";
                    c.conflict = c.kind != by_coefficient;
                }
            } catch (const FrameUnavailable&) {
            }
            break;
        }
        case Monitor::bt:
            c.kind = Codim2Kind::bogdanov_takens;
            // <p,q> = 0 here; the unit-normalised quadratic coefficient is kept.
            c.a_coeff = fp.psi_cusp;
            break;
        case Monitor::fold_hopf: {
            const auto pr = monitored_pair(spectrum(jacobian_x(f, x, th)), s.hopf_gate, &pair_ref);
            if (!pr) throw RefinementFailed("fold-Hopf refinement lost its complex pair");
            c.kind = Codim2Kind::fold_hopf;
            c.a_coeff = fp.a_coeff;
            c.pair_real = pr->real();
            c.pair_imag = pr->imag();
            break;
        }
        }
        out.push_back(std::move(c));
    }
    std::sort(out.begin(), out.end(), [](const auto& l, const auto& r) { return l.arclength < r.arclength; });
    return out;
}

Vec unstable_direction(const Mat& J, const Vec* reference) {
    const Spectrum sp = spectrum(J);
    const auto lead = sp.eigenvalues.back();
    if (std::abs(lead.imag()) > 1e-9 * std::max(1.0, std::abs(lead)))
        throw NotPseudoHyperbolic("leading eigenvalue is complex");
    Vec v = real_eigenvector(J, lead.real());
    if (reference && v.dot(*reference) < 0) v = -v;
    return v;
}

OrientedTangent centre_tangent(const FamilySpec& f, const Vec& x, const Param& theta, const Settings& s,
                               const Vec* reference) {
    const Mat J = jacobian_x(f, x, theta);
    const Spectrum sp = spectrum(J);
    auto it = std::min_element(sp.eigenvalues.begin(), sp.eigenvalues.end(),
                               [](auto l, auto r) { return std::abs(l.real()) < std::abs(r.real()); });
    if (std::abs(it->imag()) > 1e-9 * std::max(1.0, std::abs(*it)))
        throw NotPseudoHyperbolic("eigenvalue nearest the imaginary axis is complex");
    if (!(sp.gap_ratio > s.gap_min))
        throw NotPseudoHyperbolic("spectral gap " + std::to_string(sp.gap_ratio) + " below " +
                                  std::to_string(s.gap_min));
    OrientedTangent t;
    t.q = real_eigenvector(J, it->real());
    if (reference && t.q.dot(*reference) < 0) t.q = -t.q;
    return t;
}

OrientedTangent fold_orientation(const FamilySpec& f, const FoldPoint& fold, const Settings& s) {
    if (fold.nullpair.bt_flag) throw DegenerateNormalization("fold orientation undefined at <p,q> ~ 0");
    const double a = std::isfinite(fold.a_coeff) ? fold.a_coeff
                                                 : fold_coefficient_a(f, fold.x, fold.theta, fold.nullpair);
    if (std::abs(a) <= s.cusp_gate) throw AtCusp("fold coefficient " + std::to_string(a) + " at a cusp");
    return {fold.nullpair.q, sign_of(a)};
}

Mat2 cusp_frame(const FamilySpec& f, const Codim2Point& cusp, const Vec& q, const Settings& s) {
    const int n = f.dim;
    const double step = 0.01 * (1.0 + cusp.x.norm());
    std::vector<double> sig;
    std::vector<Param> offs;
    for (int k = -4; k <= 4; ++k) {
        if (k == 0) continue;
        const double sigma = k * step;
        auto residual = [&](const Vec& u) {
            Vec r(2 * n + 2);
            r.head(2 * n + 1) = fold_residual(f, u);
            r[2 * n + 1] = (fold_state(u, n) - cusp.x).dot(q) - sigma;
            return r;
        };
        const AugmentedResult res = solve_square(residual, pack_fold(cusp.x + sigma * q, q, cusp.theta),
                                                 s.newton_tol, 40);
        if (!(res.residual <= 1e-8)) throw FrameUnavailable("fold point at offset " + std::to_string(sigma) +
                                                            " did not converge");
        sig.push_back(sigma);
        offs.push_back(fold_parameters(res.u, n) - cusp.theta);
    }
    // theta - theta_c = l s + u s^2 + w s^3 + v s^4
    Mat A(sig.size(), 4);
    Mat Y(sig.size(), 2);
    for (std::size_t i = 0; i < sig.size(); ++i) {
        const double t = sig[i] / step;
        A.row(Eigen::Index(i)) << t, t * t, t * t * t, t * t * t * t;
        Y.row(Eigen::Index(i)) = offs[i].transpose();
    }
    const Mat coef = A.colPivHouseholderQr().solve(Y);
    const Param u = coef.row(1).transpose() / (step * step);
    const Param w = coef.row(2).transpose() / (step * step * step);
    Mat2 M;
    M.col(0) = u / 3.0;
    M.col(1) = -w / 2.0;
    const double scale = M.cwiseAbs().maxCoeff();
    if (!M.allFinite() || scale == 0.0 || std::abs(M.determinant()) < 1e-10 * scale * scale)
        throw FrameUnavailable("degenerate cusp frame");
    return M;
}

SheetPattern cusp_sheet_pattern(const FamilySpec& f, const Codim2Point& cusp, const Vec& q, const Mat2& frame,
                                const Settings& s) {
    const double y = 0.03;
    const Param theta = cusp.theta + frame * Param(y * y, 0.0);
    std::vector<Vec> roots;
    for (double start : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
        try {
            const Vec r = refine_equilibrium(f, cusp.x + start * y * q, theta, s);
            if ((r - cusp.x).norm() > 3.0 * y) continue;
            if (std::none_of(roots.begin(), roots.end(), [&](const Vec& o) { return (o - r).norm() < 1e-3 * y; }))
                roots.push_back(r);
        } catch (const Error&) {
        }
    }
    if (roots.size() != 3) return SheetPattern::unknown;
    std::sort(roots.begin(), roots.end(),
              [&](const Vec& l, const Vec& r) { return (l - cusp.x).dot(q) < (r - cusp.x).dot(q); });
    int idx[3];
    for (int i = 0; i < 3; ++i) {
        const auto c = classify_equilibrium(spectrum(jacobian_x(f, roots[std::size_t(i)], theta)), s.hyp_gate);
        if (c.kind == Stability::nonhyperbolic) return SheetPattern::unknown;
        idx[i] = c.index;
    }
    if (idx[0] != idx[2]) return SheetPattern::unknown;
    if (idx[1] == idx[0] + 1) return SheetPattern::standard;
    if (idx[1] == idx[0] - 1) return SheetPattern::dual;
    return SheetPattern::unknown;
}

} // namespace cusparity
