#include "cusparity/continuation.hpp"

#include "cusparity/detect.hpp"
#include "cusparity/equilibria.hpp"
#include "cusparity/errors.hpp"

#include "palc.hpp"

#include <algorithm>
#include <cmath>

namespace cusparity {

Vec pack_fold(const Vec& x, const Vec& q, const Param& theta) {
    const Eigen::Index n = x.size();
    Vec u(2 * n + 2);
    u << x, q, theta;
    return u;
}

Vec fold_state(const Vec& u, int n) { return u.head(n); }
Vec fold_direction(const Vec& u, int n) { return u.segment(n, n); }
Param fold_parameters(const Vec& u, int n) { return u.segment<2>(2 * n); }

Vec fold_residual(const FamilySpec& f, const Vec& x, const Vec& q, const Param& theta) {
    const Eigen::Index n = x.size();
    Vec r(2 * n + 1);
    r.head(n) = eval_rhs(f, x, theta);
    r.segment(n, n) = jacobian_x(f, x, theta) * q;
    r[2 * n] = q.squaredNorm() - 1.0;
    return r;
}

Vec fold_residual(const FamilySpec& f, const Vec& u) {
    return fold_residual(f, fold_state(u, f.dim), fold_direction(u, f.dim), fold_parameters(u, f.dim));
}

ParamPath::ParamPath(ParamPolyline vertices, const ParamBox& box) : vertices_(std::move(vertices)) {
    if (vertices_.size() < 2) throw std::invalid_argument("ParamPath: need at least two vertices");
    cumulative_.push_back(0.0);
    for (std::size_t i = 1; i < vertices_.size(); ++i)
        cumulative_.push_back(cumulative_.back() +
                              (vertices_[i] - vertices_[i - 1]).cwiseQuotient(box.width()).norm());
}

Param ParamPath::at(double s) const {
    if (s <= 0.0) {
        const double d = cumulative_[1];
        return vertices_[0] + (vertices_[1] - vertices_[0]) * (s / d);
    }
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
    std::size_t i = it == cumulative_.end() ? cumulative_.size() - 1 : std::size_t(it - cumulative_.begin());
    i = std::max<std::size_t>(i, 1);
    const double d = cumulative_[i] - cumulative_[i - 1];
    const double t = d > 0 ? (s - cumulative_[i - 1]) / d : 0.0;
    return vertices_[i - 1] + (vertices_[i] - vertices_[i - 1]) * t;
}

bool ParamPath::closed() const { return (vertices_.front() - vertices_.back()).norm() <= 1e-12; }

namespace {

double min_abs_eigen(const Spectrum& sp) {
    double m = std::abs(sp.eigenvalues.front());
    for (auto l : sp.eigenvalues) m = std::min(m, std::abs(l));
    return m;
}

std::optional<double> pair_real(const Spectrum& sp, double gate) {
    std::optional<double> best;
    for (auto l : sp.eigenvalues)
        if (l.imag() > gate && (!best || std::abs(l.real()) < std::abs(*best))) best = l.real();
    return best;
}

// Fold of the branch between two samples, refined on the path.
FoldEvent refine_branch_fold(const FamilySpec& f, const ParamPath& path, const BranchPoint& a,
                             const BranchPoint& b, const Settings& s) {
    const int n = f.dim;
    const BranchPoint& near = min_abs_eigen(a.spectrum) <= min_abs_eigen(b.spectrum) ? a : b;
    const Mat J0 = jacobian_x(f, near.x, near.theta);
    const Vec q0 = real_eigenvector(J0, 0.0);
    Vec u0(2 * n + 1);
    u0 << near.x, q0, near.s;
    auto residual = [&](const Vec& u) {
        return fold_residual(f, u.head(n), u.segment(n, n), path.at(u[2 * n]));
    };
    Vec u;
    try {
        u = newton_solve(residual, [&](const Vec& v) { return fd_jacobian(residual, v, 1e-7); }, u0,
                         {s.newton_tol, s.newton_maxit, 20});
    } catch (const Error& e) {
        throw BranchLost(std::string("fold on branch could not be refined: ") + e.what());
    }
    Vec q = u.segment(n, n);
    if (q.dot(q0) < 0) q = -q;
    FoldEvent ev;
    ev.s = u[2 * n];
    ev.fold = make_fold_point(f, u.head(n), q, path.at(ev.s), s);
    return ev;
}

} // namespace

Branch continue_equilibria_along_path(const FamilySpec& f, const ParamPath& path, const Vec& seed, const Settings& s,
                                      double s0, int direction) {
    const int n = f.dim;
    const double L = path.length();
    const double cap = state_cap(f, s);

    detail::ArcSystem sys;
    sys.residual = [&](const Vec& u) { return eval_rhs(f, u.head(n), path.at(u[n])); };
    sys.scale = Vec::Ones(n + 1);

    Branch br;
    Vec x0;
    try {
        x0 = refine_equilibrium(f, seed, path.at(s0), s);
    } catch (const Error& e) {
        throw BranchLost(std::string("seed is not an equilibrium: ") + e.what());
    }
    Vec u(n + 1);
    u << x0, s0;
    br.points.push_back(classify_point(f, x0, path.at(s0), s, s0));
    if ((direction < 0 && s0 <= 0.0) || (direction > 0 && s0 >= L)) return br;

    Vec tau;
    {
        auto t0 = sys.initial_tangent(u);
        if (!t0) throw BranchLost("seed sits on a singular point of the branch");
        tau = *t0;
        if (tau[n] * direction < 0 || (tau[n] == 0.0 && direction < 0)) tau = -tau;
    }

    double h = s.h_init;
    for (int step = 0; step < s.max_curve_points; ++step) {
        std::optional<detail::Corrected> c;
        Vec tau_new;
        for (int halvings = 0;; ++halvings) {
            c = detail::correct(sys, u, tau, h, s.newton_tol);
            if (c) {
                tau_new = sys.tangent(c->u, tau);
                if (tau_new.dot(tau) >= 0.9) break;
            }
            if (halvings == 4)
                throw BranchLost("corrector failed after 4 step halvings at s = " + std::to_string(u[n]));
            h *= 0.5;
        }
        Vec un = c->u;
        if (un.head(n).norm() > cap) throw BoundaryExit("branch left the state ball at s = " + std::to_string(un[n]));

        bool done = false;
        if (un[n] > L || un[n] < 0.0) {
            // Clip onto the path end that was crossed.
            const double end = un[n] > L ? L : 0.0;
            const double t = (end - u[n]) / (un[n] - u[n]);
            const Vec guess = u.head(n) + t * (un.head(n) - u.head(n));
            try {
                un.head(n) = refine_equilibrium(f, guess, path.at(end), s);
            } catch (const Error& e) {
                throw BranchLost(std::string("branch end could not be refined: ") + e.what());
            }
            un[n] = end;
            done = true;
        }

        BranchPoint bp = classify_point(f, un.head(n), path.at(un[n]), s, un[n]);
        const BranchPoint& prev = br.points.back();
        if (tau_new[n] * tau[n] < 0 && !done) br.folds.push_back(refine_branch_fold(f, path, prev, bp, s));
        const auto ra = pair_real(prev.spectrum, s.hopf_gate), rb = pair_real(bp.spectrum, s.hopf_gate);
        if (ra && rb && (*ra) * (*rb) < 0) {
            const double t = *ra / (*ra - *rb);
            br.hopfs.push_back({prev.x + t * (bp.x - prev.x), path.at(prev.s + t * (bp.s - prev.s)),
                                prev.s + t * (bp.s - prev.s)});
        }
        br.points.push_back(std::move(bp));
        if (done) return br;

        u = un;
        tau = tau_new;
        if (c->iterations <= 3) h = std::min(1.5 * h, s.h_max);
    }
    throw BranchLost("branch exceeded " + std::to_string(s.max_curve_points) + " points");
}

Branch trace_branch(const FamilySpec& f, const ParamPath& path, const Vec& seed, double s0, const Settings& s) {
    Branch back = continue_equilibria_along_path(f, path, seed, s, s0, -1);
    Branch fwd = continue_equilibria_along_path(f, path, back.points.front().x, s, s0, +1);
    Branch out;
    out.points.assign(back.points.rbegin(), back.points.rend());
    out.points.insert(out.points.end(), fwd.points.begin() + 1, fwd.points.end());
    out.folds.assign(back.folds.rbegin(), back.folds.rend());
    out.folds.insert(out.folds.end(), fwd.folds.begin(), fwd.folds.end());
    out.hopfs.assign(back.hopfs.rbegin(), back.hopfs.rend());
    out.hopfs.insert(out.hopfs.end(), fwd.hopfs.begin(), fwd.hopfs.end());
    return out;
}

LiftedCurve lift_curve(const FamilySpec& f, const ParamPolyline& base, const Vec& seed, const Settings& s) {
    if (base.size() < 2) throw std::invalid_argument("lift_curve: base needs two points");
    LiftedCurve lc;
    lc.base = base;
    lc.closed_base = (base.front() - base.back()).norm() <= 1e-12 * (1.0 + base.front().norm());

    auto check_fold = [&](const BranchPoint& bp) {
        if (min_abs_eigen(bp.spectrum) < s.fold_event_gate)
            throw FoldOnPath("lift meets a fold at theta = (" + std::to_string(bp.theta[0]) + ", " +
                             std::to_string(bp.theta[1]) + ")");
    };

    Vec x;
    try {
        x = refine_equilibrium(f, seed, base.front(), s);
    } catch (const Error& e) {
        throw BranchLost(std::string("lift seed is not an equilibrium: ") + e.what());
    }
    BranchPoint bp = classify_point(f, x, base.front(), s);
    check_fold(bp);
    lc.fiber.push_back(x);
    lc.stability.push_back(bp.stability);

    const Param w = f.box.width();
    const double max_dtheta = 0.25 * s.h_max;
    for (std::size_t i = 1; i < base.size(); ++i) {
        const Param a = base[i - 1], b = base[i];
        const double seg = (b - a).cwiseQuotient(w).norm();
        int pieces = std::max(1, int(std::ceil(seg / max_dtheta)));
        double t = 0.0;
        int halvings = 0;
        while (t < 1.0 - 1e-15) {
            const double dt = std::min(1.0 / pieces, 1.0 - t);
            const Param th0 = a + t * (b - a);
            const Param th = a + (t + dt) * (b - a);
            const double dl = dt * seg;
            // tangent predictor dx = -J^{-1} X_theta dtheta
            Vec pred;
            try {
                pred = x - solve_linear(jacobian_x(f, x, th0), jacobian_theta(f, x, th0) * (th - th0));
            } catch (const SingularMatrix&) {
                throw FoldOnPath("lift meets a singular jacobian near sample " + std::to_string(i));
            }
            std::optional<Vec> xn;
            try {
                xn = refine_equilibrium(f, pred, th, s);
            } catch (const Error&) {
            }
            const double rate = dl > 0 ? (pred - x).norm() / dl : 0.0;
            const double gate = s.jump_gate_factor * std::max(dl, 1e-12) * std::max(1.0, rate);
            if (!xn || (*xn - x).norm() > gate) {
                if (++halvings > 4) {
                    const BranchPoint last = classify_point(f, x, th0, s);
                    if (min_abs_eigen(last.spectrum) < s.seed_gate)
                        throw FoldOnPath("lift runs into a fold near sample " + std::to_string(i));
                    throw BranchLost("lift lost its branch after 4 step halvings near sample " + std::to_string(i));
                }
                pieces *= 2;
                continue;
            }
            halvings = 0;
            x = *xn;
            t += dt;
            const BranchPoint cur = classify_point(f, x, th, s);
            check_fold(cur);
        }
        bp = classify_point(f, x, b, s);
        lc.fiber.push_back(x);
        lc.stability.push_back(bp.stability);
    }
    lc.end_gap = (lc.fiber.back() - lc.fiber.front()).norm();
    // Both ends are refined equilibria over the same parameter: either the
    // same root to Newton accuracy or a different one.
    lc.simple = lc.closed_base && lc.end_gap <= 1e-6 * (1.0 + lc.fiber.front().norm());
    return lc;
}

} // namespace cusparity
