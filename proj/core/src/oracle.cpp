#include "cusparity/oracle.hpp"

#include "cusparity/continuation.hpp"
#include "cusparity/equilibria.hpp"
#include "cusparity/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cusparity {

namespace {

struct Fold {
    Param theta;
    double fxx;
};

Fold fold_at(const ParameterLinearForm& lf, double x) {
    const double t1 = -lf.dh(x) / lf.dg(x);
    const double t2 = -t1 * lf.g(x) - lf.h(x);
    return {{t1, t2}, t1 * lf.d2g(x) + lf.d2h(x)};
}

double bisect(const std::function<double(double)>& fn, double lo, double hi, double tol) {
    double flo = fn(lo);
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double fm = fn(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

OracleResult parameter_linear_oracle(const FamilySpec& f, const Settings& s) {
    if (f.dim != 1 || !f.linear_form)
        throw NotParameterLinear("family '" + f.name + "' is not of the form x' = t2 + t1 g(x) + h(x)");
    const auto& lf = *f.linear_form;
    OracleResult r;
    const double R = state_radius(f, s);
    r.x_lo = -R;
    r.x_hi = R;
    const std::size_t n = std::max<std::size_t>(s.oracle_points, 3);
    r.samples = n;

    auto inside = [&](double x) {
        if (std::abs(lf.dg(x)) < 1e-12) return false;
        const Param t = fold_at(lf, x).theta;
        return t.allFinite() && f.box.contains(t, 1e-12);
    };
    // Box crossing between an inside and an outside sample.
    auto crossing = [&](double in, double out) {
        while (std::abs(out - in) > s.oracle_bisection_tol) {
            const double mid = 0.5 * (in + out);
            (inside(mid) ? in : out) = mid;
        }
        return in;
    };

    bool open = false;
    double prev_x = 0.0, prev_fxx = 0.0;
    bool have_prev = false;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = r.x_lo + (r.x_hi - r.x_lo) * double(i) / double(n - 1);
        if (std::abs(lf.dg(x)) < 1e-12) r.excluded.push_back(x);
        if (!inside(x)) {
            if (open) {
                const double xe = crossing(prev_x, x);
                r.pieces.back().push_back(fold_at(lf, xe).theta);
                r.piece_x.back().push_back(xe);
            }
            open = false;
            have_prev = false;
            prev_x = x;
            continue;
        }
        const Fold fd = fold_at(lf, x);
        if (!open) {
            r.pieces.emplace_back();
            r.piece_x.emplace_back();
            if (i > 0) {
                const double xs = crossing(x, prev_x);
                r.pieces.back().push_back(fold_at(lf, xs).theta);
                r.piece_x.back().push_back(xs);
            }
            open = true;
        }
        r.pieces.back().push_back(fd.theta);
        r.piece_x.back().push_back(x);
        if (have_prev && (fd.fxx == 0.0 || prev_fxx * fd.fxx < 0)) {
            const double xc = fd.fxx == 0.0 ? x
                                            : bisect([&](double y) { return fold_at(lf, y).fxx; }, prev_x, x,
                                                     s.oracle_bisection_tol);
            const Fold fc = fold_at(lf, xc);
            if (f.box.contains(fc.theta, 1e-12)) {
                // cubic coefficient of t2 + t1 g + h at the cusp, up to the positive 1/6
                const double h3 = 1e-4 * (1.0 + std::abs(xc));
                const double c = (fold_at(lf, xc + h3).fxx - fold_at(lf, xc - h3).fxx) / (2 * h3);
                r.cusps.push_back({xc, fc.theta, c < 0 ? -1 : 1});
            }
        }
        prev_x = x;
        prev_fxx = fd.fxx;
        have_prev = fd.fxx != 0.0;
    }
    return r;
}

bool OracleDiff::agrees(double hausdorff_tol, double cusp_tol) const {
    return hausdorff < hausdorff_tol && oracle_cusps == continuation_cusps && max_cusp_error <= cusp_tol;
}

OracleDiff compare_with_oracle(const FamilySpec& f, const OracleResult& oracle,
                               const std::vector<FoldCurveRecord>& curves, const Settings& s) {
    OracleDiff d;
    d.oracle_curves = oracle.pieces.size();
    d.continuation_curves = curves.size();
    d.oracle_cusps = oracle.cusps.size();
    std::vector<ParamPolyline> lines;
    std::vector<Codim2Point> cusps;
    for (const auto& c : curves) {
        lines.push_back(densify(f, c, 0.02 * s.h_max, s).parameters());
        for (const auto& m : c.codim2_points)
            if (m.kind == Codim2Kind::cusp_standard || m.kind == Codim2Kind::cusp_dual) cusps.push_back(m);
    }
    d.continuation_cusps = cusps.size();
    if (lines.empty() || oracle.pieces.empty())
        d.hausdorff = lines.empty() && oracle.pieces.empty() ? 0.0 : INFINITY;
    else
        d.hausdorff = hausdorff_distance(lines, oracle.pieces, f.box);
    for (const auto& oc : oracle.cusps) {
        double best = INFINITY;
        for (const auto& m : cusps) best = std::min(best, (f.box.to_unit(m.theta) - f.box.to_unit(oc.theta)).norm());
        d.max_cusp_error = std::max(d.max_cusp_error, best);
    }
    return d;
}

} // namespace cusparity
