#include "cusparity/continuation.hpp"

#include "cusparity/detect.hpp"
#include "cusparity/equilibria.hpp"
#include "cusparity/errors.hpp"

#include "palc.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <set>

namespace cusparity {

namespace {

Vec fold_scale(const FamilySpec& f) {
    Vec sc = Vec::Ones(2 * f.dim + 2);
    sc.tail<2>() = f.box.width();
    return sc;
}

// (x, theta) with theta mapped onto the unit square.
Vec embed(const FamilySpec& f, const Vec& x, const Param& theta) {
    Vec e(x.size() + 2);
    e << x, f.box.to_unit(theta);
    return e;
}

Vec embed(const FamilySpec& f, const Vec& u) {
    return embed(f, fold_state(u, f.dim), fold_parameters(u, f.dim));
}

double point_segment(const Vec& p, const Vec& a, const Vec& b) {
    const Vec d = b - a;
    const double dd = d.squaredNorm();
    const double t = dd > 0 ? std::clamp((p - a).dot(d) / dd, 0.0, 1.0) : 0.0;
    return (p - (a + t * d)).norm();
}

double point_curve(const Vec& p, const std::vector<Vec>& pts) {
    if (pts.size() == 1) return (p - pts[0]).norm();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < pts.size(); ++i) best = std::min(best, point_segment(p, pts[i - 1], pts[i]));
    return best;
}

std::vector<Vec> embedded_points(const FamilySpec& f, const FoldCurveRecord& c) {
    std::vector<Vec> out;
    out.reserve(c.points.size());
    for (const auto& p : c.points) out.push_back(embed(f, p.x, p.theta));
    return out;
}

// Edge with the largest scaled violation, if theta is outside the box.
std::optional<Edge> violated_edge(const ParamBox& box, const Param& theta, double tol) {
    const Param w = box.width();
    std::optional<Edge> e;
    double worst = tol;
    auto check = [&](double v, Edge edge) {
        if (v > worst) {
            worst = v;
            e = edge;
        }
    };
    check((box.lo[0] - theta[0]) / w[0], Edge::left);
    check((theta[0] - box.hi[0]) / w[0], Edge::right);
    check((box.lo[1] - theta[1]) / w[1], Edge::bottom);
    check((theta[1] - box.hi[1]) / w[1], Edge::top);
    return e;
}

std::optional<Edge> edge_of(const ParamBox& box, const Param& theta, double tol) {
    const Param d1 = (theta - box.lo).cwiseQuotient(box.width());
    const Param d2 = (box.hi - theta).cwiseQuotient(box.width());
    if (std::abs(d1[0]) <= tol) return Edge::left;
    if (std::abs(d2[0]) <= tol) return Edge::right;
    if (std::abs(d1[1]) <= tol) return Edge::bottom;
    if (std::abs(d2[1]) <= tol) return Edge::top;
    return std::nullopt;
}

int edge_component(Edge e) { return e == Edge::left || e == Edge::right ? 0 : 1; }

double edge_value(const ParamBox& box, Edge e) {
    switch (e) {
    case Edge::left:
        return box.lo[0];
    case Edge::right:
        return box.hi[0];
    case Edge::bottom:
        return box.lo[1];
    case Edge::top:
        return box.hi[1];
    }
    return 0.0;
}

struct Half {
    std::vector<Vec> us;
    bool closed = false;
    std::optional<Edge> edge;
    std::vector<std::string> notes;
};

Half trace_half(const FamilySpec& f, const detail::ArcSystem& sys, const Vec& u0, Vec tau, const Settings& s,
                bool allow_closure) {
    const int n = f.dim;
    const double cap = state_cap(f, s);
    Half half;
    half.us.push_back(u0);
    const Vec start = embed(f, u0);
    const Vec tau_start = tau;
    Vec u = u0;
    double h = s.h_init;
    double travelled = 0.0;

    while (true) {
        if (int(half.us.size()) >= s.max_curve_points) {
            half.notes.push_back("stopped at the point limit " + std::to_string(s.max_curve_points));
            return half;
        }
        std::optional<detail::Corrected> c;
        Vec tau_new;
        while (true) {
            c = detail::correct(sys, u, tau, h, s.newton_tol);
            if (c) {
                tau_new = sys.tangent(c->u, tau);
                const bool smooth = tau_new.dot(tau) >= 0.9;
                const bool q_continuous =
                    fold_direction(c->u, n).dot(fold_direction(u, n)) > s.transport_gate;
                if (smooth && q_continuous) break;
            }
            h *= 0.5;
            if (h < s.h_min)
                throw StepCollapse("fold continuation step fell below " + std::to_string(s.h_min) + " at theta = (" +
                                   std::to_string(u[2 * n]) + ", " + std::to_string(u[2 * n + 1]) + ")");
        }
        const Vec un = c->u;
        const Param th = fold_parameters(un, n);

        if (auto e = violated_edge(f.box, th, s.edge_tol)) {
            const int k = edge_component(*e);
            const double target = edge_value(f.box, *e);
            const double t = (target - u[2 * n + k]) / (un[2 * n + k] - u[2 * n + k]);
            const Vec guess = u + std::clamp(t, 0.0, 1.0) * (un - u);
            auto hit = detail::solve_augmented([&](const Vec& v) { return fold_residual(f, v); },
                                               [&](const Vec& v) { return v[2 * n + k] - target; }, guess,
                                               s.newton_tol);
            if (!hit) {
                half.notes.push_back("edge crossing could not be refined");
            } else if (sys.distance(*hit, u) > 1e-12) {
                (*hit)[2 * n + k] = target;
                half.us.push_back(*hit);
            }
            half.edge = *e;
            return half;
        }
        if (fold_state(un, n).norm() > cap) {
            half.notes.push_back("fold curve left the state ball");
            return half;
        }

        const double step_len = (embed(f, un) - embed(f, u)).norm();
        if (allow_closure && half.us.size() >= 10 && travelled > 10.0 * s.closure_tol) {
            const double gap = point_segment(start, embed(f, u), embed(f, un));
            const Vec dir = (embed(f, un) - embed(f, u));
            if (gap < std::max(s.closure_tol, 0.25 * h) && tau_new.dot(tau_start) > 0.0 && dir.norm() > 0) {
                Vec last = u0;
                if (fold_direction(last, n).dot(fold_direction(u, n)) < 0) last.segment(n, n) *= -1.0;
                half.us.push_back(last);
                half.closed = true;
                return half;
            }
        }

        half.us.push_back(un);
        travelled += step_len;
        u = un;
        tau = tau_new;
        if (c->iterations <= 3) h = std::min(1.5 * h, s.h_max);
    }
}

// Fold points along us with the left null vector transported in order.
std::vector<FoldPoint> build_points(const FamilySpec& f, const std::vector<Vec>& us, const Settings& s,
                                    const Vec* p_first) {
    const int n = f.dim;
    std::vector<FoldPoint> pts;
    pts.reserve(us.size());
    double arc = 0.0;
    for (std::size_t i = 0; i < us.size(); ++i) {
        const Vec x = fold_state(us[i], n), q = fold_direction(us[i], n);
        const Param th = fold_parameters(us[i], n);
        const Vec* ref = i == 0 ? p_first : &pts.back().p_unit;
        if (i > 0) arc += (embed(f, us[i]) - embed(f, us[i - 1])).norm();
        pts.push_back(make_fold_point(f, x, q, th, s, ref));
        pts.back().arclength = arc;
    }
    return pts;
}

void attach_markers(const FamilySpec& f, FoldCurveRecord& rec, const Settings& s) {
    rec.codim2_points.clear();
    for (std::size_t i = 1; i < rec.points.size(); ++i) {
        try {
            for (auto& c : classify_codim2(f, rec.points[i - 1], rec.points[i], s))
                rec.codim2_points.push_back(std::move(c));
        } catch (const Error& e) {
            rec.notes.push_back(std::string(e.kind()) + ": " + e.what());
        }
    }
}

} // namespace

FoldPoint refine_fold_seed(const FamilySpec& f, const Vec& x0, const Vec& q0, const Param& theta0,
                           const Settings& s) {
    const int n = f.dim;
    const Vec sc = fold_scale(f);
    const Vec v0 = pack_fold(x0, q0.normalized(), theta0).cwiseQuotient(sc);
    auto R = [&](const Vec& v) { return fold_residual(f, v.cwiseProduct(sc)); };
    Vec v;
    try {
        v = newton_minimum_norm(R, [&](const Vec& w) { return fd_jacobian(R, w, 1e-7); }, v0,
                                {s.newton_tol, s.newton_maxit, 20});
    } catch (const Error& e) {
        throw SeedDegenerate(std::string("fold seed did not converge: ") + e.what());
    }
    const Vec u = v.cwiseProduct(sc);
    const Param th = fold_parameters(u, n);
    if (!f.box.contains(th, 1e-9 * f.box.diagonal())) throw SeedDegenerate("fold seed lies outside the box");
    Vec q = fold_direction(u, n);
    for (Eigen::Index i = 0; i < q.size(); ++i)
        if (std::abs(q[i]) > 1e-12) {
            if (q[i] < 0) q = -q;
            break;
        }
    return make_fold_point(f, fold_state(u, n), q, th, s);
}

FoldCurveRecord continue_fold_curve(const FamilySpec& f, const FoldPoint& seed, const Settings& s) {
    const int n = f.dim;
    const Vec u0 = pack_fold(seed.x, seed.nullpair.q, seed.theta);
    if (!(fold_residual(f, u0).norm() <= 1e-8)) throw SeedDegenerate("seed does not solve the fold system");

    detail::ArcSystem sys;
    sys.residual = [&](const Vec& u) { return fold_residual(f, u); };
    sys.scale = fold_scale(f);
    auto t0 = sys.initial_tangent(u0);
    if (!t0) throw SeedDegenerate("fold system is singular at the seed");
    Vec tau = *t0;
    // Deterministic orientation: increasing first parameter, then second.
    if (tau[2 * n] < 0 || (tau[2 * n] == 0 && tau[2 * n + 1] < 0)) tau = -tau;

    Half fwd = trace_half(f, sys, u0, tau, s, true);
    FoldCurveRecord rec;
    std::vector<Vec> us;
    if (fwd.closed) {
        us = fwd.us;
        rec.closed = true;
    } else {
        Half back = trace_half(f, sys, u0, -tau, s, false);
        us.assign(back.us.rbegin(), back.us.rend());
        us.insert(us.end(), fwd.us.begin() + 1, fwd.us.end());
        rec.start_edge = back.edge;
        rec.end_edge = fwd.edge;
        rec.notes.insert(rec.notes.end(), back.notes.begin(), back.notes.end());
        if (!back.edge) {
            if (auto e = edge_of(f.box, fold_parameters(us.front(), n), 1e-9)) rec.start_edge = e;
        }
    }
    rec.notes.insert(rec.notes.end(), fwd.notes.begin(), fwd.notes.end());
    if (!rec.closed && !rec.end_edge) {
        if (auto e = edge_of(f.box, fold_parameters(us.back(), n), 1e-9)) rec.end_edge = e;
    }

    rec.points = build_points(f, us, s, nullptr);
    rec.arclength = rec.points.back().arclength;
    attach_markers(f, rec, s);
    return rec;
}

std::vector<FoldCurveRecord> enumerate_fold_curves(const FamilySpec& f, const Settings& s, EnumerationLog* log) {
    const int G = std::max(2, s.grid);
    const std::size_t nodes = std::size_t(G) * std::size_t(G);
    auto node_theta = [&](std::size_t k) {
        const double i = double(k % std::size_t(G)), j = double(k / std::size_t(G));
        return Param(f.box.lo + Param(i / (G - 1), j / (G - 1)).cwiseProduct(f.box.width()));
    };

    std::vector<std::vector<BranchPoint>> roots(nodes);
    detail::parallel_for(nodes, s.threads, [&](std::size_t k) {
        try {
            roots[k] = equilibria_at(f, node_theta(k), s, k);
        } catch (const Error&) {
        }
    });

    // (node, root) pairs that spawn fold refinements.
    std::set<std::pair<std::size_t, std::size_t>> picks;
    for (std::size_t k = 0; k < nodes; ++k) {
        for (std::size_t r = 0; r < roots[k].size(); ++r)
            if (roots[k][r].spectrum.min_abs_real() < s.seed_gate) picks.insert({k, r});
        const std::size_t i = k % std::size_t(G), j = k / std::size_t(G);
        std::vector<std::size_t> nbrs;
        if (i + 1 < std::size_t(G)) nbrs.push_back(k + 1);
        if (j + 1 < std::size_t(G)) nbrs.push_back(k + std::size_t(G));
        for (std::size_t m : nbrs) {
            if (roots[k].size() == roots[m].size()) continue;
            const std::size_t rich = roots[k].size() > roots[m].size() ? k : m;
            for (std::size_t r = 0; r < roots[rich].size(); ++r) picks.insert({rich, r});
        }
    }
    const std::vector<std::pair<std::size_t, std::size_t>> seeds(picks.begin(), picks.end());

    std::vector<std::optional<FoldPoint>> refined(seeds.size());
    std::vector<std::string> errors(seeds.size());
    detail::parallel_for(seeds.size(), s.threads, [&](std::size_t i) {
        const BranchPoint& bp = roots[seeds[i].first][seeds[i].second];
        try {
            const Mat J = jacobian_x(f, bp.x, bp.theta);
            auto it = std::min_element(bp.spectrum.eigenvalues.begin(), bp.spectrum.eigenvalues.end(),
                                       [](auto a, auto b) { return std::abs(a) < std::abs(b); });
            const Vec q0 = real_eigenvector(J, it->real());
            refined[i] = refine_fold_seed(f, bp.x, q0, bp.theta, s);
        } catch (const Error& e) {
            errors[i] = e.what();
        }
    });

    if (log) {
        log->seeds = seeds.size();
        log->refined =
            std::size_t(std::count_if(refined.begin(), refined.end(), [](auto& r) { return r.has_value(); }));
    }

    std::vector<FoldCurveRecord> curves;
    std::vector<std::vector<Vec>> embedded;
    const double near = std::max(s.dedup_tol, 0.1 * s.h_max);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (!refined[i]) continue;
        const Vec e = embed(f, refined[i]->x, refined[i]->theta);
        const bool known = std::any_of(embedded.begin(), embedded.end(),
                                       [&](const std::vector<Vec>& c) { return point_curve(e, c) < near; });
        if (known) continue;
        FoldCurveRecord rec;
        try {
            rec = continue_fold_curve(f, *refined[i], s);
        } catch (const Error& err) {
            if (log) log->failures.push_back("seed " + std::to_string(i) + ": " + err.kind() + ": " + err.what());
            continue;
        }
        std::vector<Vec> pts = embedded_points(f, rec);
        bool duplicate = false;
        for (const auto& other : embedded) {
            double worst = 0.0;
            for (const auto& p : pts) worst = std::max(worst, point_curve(p, other));
            for (const auto& p : other) worst = std::max(worst, point_curve(p, pts));
            if (worst < near) duplicate = true;
        }
        if (duplicate) continue;
        rec.id = int(curves.size());
        curves.push_back(std::move(rec));
        embedded.push_back(std::move(pts));
    }
    if (log)
        for (std::size_t i = 0; i < seeds.size(); ++i)
            if (!refined[i] && log->failures.size() < 50)
                log->failures.push_back("seed " + std::to_string(i) + ": " + errors[i]);
    return curves;
}

FoldCurveRecord densify(const FamilySpec& f, const FoldCurveRecord& curve, double max_gap, const Settings& s) {
    const Vec sc = fold_scale(f);
    auto gap_of = [&](const Vec& ua, const Vec& ub) {
        return (embed(f, ub) - embed(f, ua)).norm();
    };
    // Corrected inserts can land slightly off the even split, so gaps are
    // rechecked until they all pass.
    std::function<void(const Vec&, const Vec&, int, std::vector<Vec>&)> fill =
        [&](const Vec& ua, const Vec& ub, int depth, std::vector<Vec>& out) {
            const double gap = gap_of(ua, ub);
            if (gap <= max_gap || depth > 6) return;
            const int extra = std::max(1, int(std::ceil(gap / max_gap)) - 1);
            const Vec dir = (ub - ua).cwiseQuotient(sc);
            Vec prev = ua;
            for (int k = 1; k <= extra; ++k) {
                const Vec guess = ua + (double(k) / (extra + 1)) * (ub - ua);
                auto hit = detail::solve_augmented([&](const Vec& v) { return fold_residual(f, v); },
                                                   [&](const Vec& v) { return dir.dot((v - guess).cwiseQuotient(sc)); },
                                                   guess, s.newton_tol);
                if (!hit) continue;
                fill(prev, *hit, depth + 1, out);
                out.push_back(*hit);
                prev = *hit;
            }
            fill(prev, ub, depth + 1, out);
        };
    std::vector<Vec> us;
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        const auto& p = curve.points[i];
        const Vec ub = pack_fold(p.x, p.nullpair.q, p.theta);
        if (i > 0) {
            const Vec ua = us.back();
            fill(ua, ub, 0, us);
        }
        us.push_back(ub);
    }
    FoldCurveRecord out = curve;
    const Vec p0 = curve.points.front().p_unit;
    out.points = build_points(f, us, s, &p0);
    out.arclength = out.points.back().arclength;
    return out;
}

namespace {

Param normal_form_point(double y, double a) { return Param(3.0 * y * y - a, -2.0 * y * y * y + a * y); }

const Mat2& frame_of(const Codim2Point& cusp) {
    if (!cusp.frame) throw FrameUnavailable("cusp carries no normal-form frame");
    return *cusp.frame;
}

} // namespace

ParamPolyline approximating_curve(const Codim2Point& cusp, double amplitude, double span, int samples) {
    const Mat2& M = frame_of(cusp);
    ParamPolyline out;
    samples = std::max(samples, 2);
    for (int k = 0; k < samples; ++k) {
        const double y = -span + 2.0 * span * k / (samples - 1);
        out.push_back(cusp.theta + M * normal_form_point(y, amplitude));
    }
    return out;
}

ParamPolyline closed_approximating_curve(const Codim2Point& cusp, double amplitude, double span, int samples) {
    const Mat2& M = frame_of(cusp);
    samples = std::max(samples, 4);
    ParamPolyline out;
    if (amplitude > 0) {
        // Self-intersection at y = +-sqrt(a/2), both mapping to (a/2, 0).
        const double y0 = std::sqrt(0.5 * amplitude);
        for (int k = 0; k < samples; ++k) {
            const double y = -y0 + 2.0 * y0 * k / (samples - 1);
            out.push_back(cusp.theta + M * normal_form_point(y, amplitude));
        }
        out.back() = out.front();
        return out;
    }
    for (int k = 0; k < samples; ++k) {
        const double y = -span + 2.0 * span * k / (samples - 1);
        out.push_back(cusp.theta + M * normal_form_point(y, amplitude));
    }
    const Param a = normal_form_point(span, amplitude), b = normal_form_point(-span, amplitude);
    const int closing = std::max(2, samples / 4);
    for (int k = 1; k <= closing; ++k) out.push_back(cusp.theta + M * (a + (double(k) / closing) * (b - a)));
    out.back() = out.front();
    return out;
}

Vec approximating_curve_seed(const Codim2Point& cusp, double amplitude, double span) {
    const double y0 = amplitude > 0 ? -std::sqrt(0.5 * amplitude) : -span;
    return cusp.x + y0 * cusp.q;
}

} // namespace cusparity
