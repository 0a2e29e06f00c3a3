#include "cusparity/szparity.hpp"

#include "cusparity/detect.hpp"
#include "cusparity/equilibria.hpp"
#include "cusparity/errors.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <sstream>

namespace cusparity {

std::string_view to_string(OpposedMethod m) {
    return m == OpposedMethod::flow_orientation ? "flow_orientation" : "potential_slope";
}

OpposedMethod opposed_method_from_string(std::string_view s) {
    if (s == "flow_orientation") return OpposedMethod::flow_orientation;
    if (s == "potential_slope") return OpposedMethod::potential_slope;
    throw ParseError("unknown opposed method '" + std::string(s) + "'");
}

std::string_view to_string(Parity p) { return p == Parity::odd ? "odd" : "even"; }

namespace {

std::string fmt_param(const Param& t) {
    std::ostringstream os;
    os << "(" << t[0] << ", " << t[1] << ")";
    return os.str();
}

// Equilibria on one edge, each root traced once.
std::vector<Branch> scan_edge(const FamilySpec& f, Edge e, int edge_no, const Settings& s) {
    const auto seg = f.box.edge_segment(e);
    const ParamPath path({seg[0], seg[1]}, f.box);
    const double L = path.length();
    constexpr int kSamples = 10;
    std::vector<Branch> branches;
    for (int k = 0; k <= kSamples; ++k) {
        const double sk = L * k / kSamples;
        const auto roots = find_equilibria(f, path.at(sk), s, std::uint64_t(1000 * (edge_no + 1) + k));
        std::vector<bool> covered(roots.size(), false);
        // Existing branches claim the root nearest to their interpolated state.
        for (const auto& b : branches)
            for (std::size_t i = 1; i < b.points.size(); ++i) {
                const auto &p = b.points[i - 1], &q = b.points[i];
                if (sk < std::min(p.s, q.s) || sk > std::max(p.s, q.s)) continue;
                const double t = q.s != p.s ? (sk - p.s) / (q.s - p.s) : 0.0;
                const Vec xi = p.x + t * (q.x - p.x);
                std::size_t best = 0;
                double bd = INFINITY;
                for (std::size_t r = 0; r < roots.size(); ++r) {
                    const double d = (roots[r] - xi).norm();
                    if (d < bd) bd = d, best = r;
                }
                if (!roots.empty()) covered[best] = true;
            }
        for (std::size_t r = 0; r < roots.size(); ++r)
            if (!covered[r]) branches.push_back(trace_branch(f, path, roots[r], sk, s));
    }
    return branches;
}

// Unit unstable direction, continued through the saddle arc with midpoint
// refinement when consecutive directions drift apart.
std::vector<Vec> transport_unstable(const FamilySpec& f, const std::vector<BranchPoint>& arc, const Settings& s,
                                    Vec start) {
    std::vector<Vec> out;
    auto dir_at = [&](const Vec& x, const Param& t, const Vec& ref) {
        return unstable_direction(jacobian_x(f, x, t), &ref);
    };
    std::function<Vec(const BranchPoint&, const BranchPoint&, const Vec&, int)> step =
        [&](const BranchPoint& a, const BranchPoint& b, const Vec& va, int depth) -> Vec {
        const Vec vb = dir_at(b.x, b.theta, va);
        if (std::abs(vb.dot(va)) >= s.transport_gate) return vb;
        if (depth >= 8)
            throw TransportBroken("unstable direction jumps between saddles at theta = " + fmt_param(a.theta) +
                                  " and " + fmt_param(b.theta));
        const Param tm = 0.5 * (a.theta + b.theta);
        BranchPoint m;
        try {
            m = classify_point(f, refine_equilibrium(f, 0.5 * (a.x + b.x), tm, s), tm, s);
        } catch (const Error& e) {
            throw TransportBroken(std::string("saddle arc refinement failed: ") + e.what());
        }
        if (!m.stability.is_saddle(1)) throw TransportBroken("saddle arc refinement left the 1-saddles");
        const Vec vm = step(a, m, va, depth + 1);
        return step(m, b, vm, depth + 1);
    };
    Vec v = dir_at(arc.front().x, arc.front().theta, start);
    out.push_back(v);
    for (std::size_t i = 1; i < arc.size(); ++i) {
        v = step(arc[i - 1], arc[i], v, 0);
        out.push_back(v);
    }
    return out;
}

// Orientation of the fold in state space: sign(a) q.
Vec oriented(const FamilySpec& f, const FoldPoint& p, const Settings& s) {
    const auto o = fold_orientation(f, p, s);
    return double(o.direction) * o.q;
}

} // namespace

bool opposed_folds(const SZReport& sz, const FamilySpec& f, const Settings& s, OpposedMethod method) {
    if (sz.folds.size() != 2 || sz.components.size() != 3)
        throw SZViolation("opposedness needs two folds and three boundary arcs");
    const auto& arc = sz.saddle_arc().points;
    if (arc.empty()) throw SZViolation("saddle arc is empty");
    const auto& x1 = sz.folds[0];
    const auto& x2 = sz.folds[1];
    const auto v = transport_unstable(f, arc, s, x1.nullpair.q);

    if (method == OpposedMethod::flow_orientation) {
        const bool agree1 = oriented(f, x1, s).dot(v.front()) > 0;
        const bool agree2 = oriented(f, x2, s).dot(v.back()) > 0;
        return agree1 != agree2;
    }
    if (!f.potential) throw SZViolation("potential slope needs a gradient family");
    // odd part of the potential along the oriented direction at each fold
    auto slope = [&](const FoldPoint& p, const Vec& dir) {
        const double eps = 1e-3 * (1.0 + p.x.norm());
        return f.potential(p.x + eps * dir, p.theta) - f.potential(p.x - eps * dir, p.theta);
    };
    const double s1 = slope(x1, v.front()), s2 = slope(x2, v.back());
    return (s1 > 0) != (s2 > 0);
}

SZReport boundary_scan(const FamilySpec& f, const Settings& s) {
    SZReport r;
    const auto order = f.box.edges_from_sz();
    for (int k = 0; k < 4; ++k) r.edges.push_back({order[k], scan_edge(f, order[k], k, s)});

    const auto& sz_edge = r.edges.front();
    const std::string sz_name(to_string(sz_edge.edge));
    if (sz_edge.branches.size() != 1)
        throw SZViolation("S/Z edge " + sz_name + " carries " + std::to_string(sz_edge.branches.size()) +
                          " equilibrium branches, expected 1");
    r.edge_branch = sz_edge.branches.front();
    if (!r.edge_branch.hopfs.empty())
        throw SZViolation("Hopf event on the S/Z edge at theta = " + fmt_param(r.edge_branch.hopfs.front().theta));
    if (r.edge_branch.folds.size() != 2)
        throw SZViolation("S/Z edge " + sz_name + " carries " + std::to_string(r.edge_branch.folds.size()) +
                          " folds, expected 2");
    for (const auto& ev : r.edge_branch.folds) r.folds.push_back(ev.fold);

    for (const auto& bp : r.edge_branch.points) {
        if (bp.stability.kind == Stability::nonhyperbolic) continue;
        if (r.components.empty() || !(r.components.back().stability == bp.stability))
            r.components.push_back({bp.stability, {}});
        r.components.back().points.push_back(bp);
    }
    const bool shape = r.components.size() == 3 && r.components[0].stability.kind == Stability::attractor &&
                       r.components[1].stability.is_saddle(1) &&
                       r.components[2].stability.kind == Stability::attractor;
    if (!shape) {
        std::string got;
        for (const auto& c : r.components) got += (got.empty() ? "" : ", ") + to_string(c.stability);
        throw SZViolation("S/Z branch arcs are [" + got + "], expected [attractor, 1-saddle, attractor]");
    }

    for (std::size_t k = 1; k < r.edges.size(); ++k) {
        const std::string name(to_string(r.edges[k].edge));
        for (const auto& b : r.edges[k].branches) {
            if (!b.folds.empty())
                throw SZViolation("extra folds on edge " + name + " at theta = " +
                                  fmt_param(b.folds.front().fold.theta));
            if (!b.hopfs.empty())
                throw SZViolation("Hopf event on edge " + name + " at theta = " + fmt_param(b.hopfs.front().theta));
        }
    }
    r.other_edges_clean = true;

    r.opposed_by_flow = opposed_folds(r, f, s, OpposedMethod::flow_orientation);
    if (f.kind == FamilyKind::gradient && f.potential) {
        r.opposed_method = OpposedMethod::potential_slope;
        r.opposed = opposed_folds(r, f, s, OpposedMethod::potential_slope);
    } else {
        r.opposed_method = OpposedMethod::flow_orientation;
        r.opposed = *r.opposed_by_flow;
    }
    return r;
}

// ---------------------------------------------------------------------------

SaddleCloud::SaddleCloud(const FamilySpec& f, const Settings& s, int grid) : f_(&f), s_(s), grid_(grid) {
    const int G = grid_;
    std::vector<std::vector<Node>> per(std::size_t(G) * G);
    detail::parallel_for(per.size(), s.threads, [&](std::size_t idx) {
        const int i = int(idx) / G, j = int(idx) % G;
        const Param th = f.box.lo + Param(double(i) / (G - 1), double(j) / (G - 1)).cwiseProduct(f.box.width());
        for (const auto& bp : equilibria_at(f, th, s, 500000 + idx, s.member_restarts))
            if (bp.stability.is_saddle(1)) per[idx].push_back({bp.x, th, i, j});
    });
    at_.assign(per.size(), {});
    auto& at = at_;
    for (std::size_t idx = 0; idx < per.size(); ++idx)
        for (auto& n : per[idx]) {
            at[idx].push_back(int(nodes_.size()));
            nodes_.push_back(std::move(n));
        }
    adjacent_.resize(nodes_.size());
    parent_.resize(nodes_.size());
    for (std::size_t i = 0; i < parent_.size(); ++i) parent_[i] = int(i);

    auto link = [&](int a, int b) {
        if (std::find(adjacent_[a].begin(), adjacent_[a].end(), b) != adjacent_[a].end()) return;
        adjacent_[a].push_back(b);
        adjacent_[b].push_back(a);
        const int ra = find(a), rb = find(b);
        if (ra != rb) parent_[std::max(ra, rb)] = std::min(ra, rb);
    };
    const double spacing = 1.0 / (G - 1);
    const double gate = s.member_adjacency * spacing;
    const int reach = int(std::ceil(s.member_adjacency));
    auto unit = [&](const Node& n) { return f.box.to_unit(n.theta); };

    // distance adjacency in (x, unit theta)
    for (int i = 0; i < G; ++i)
        for (int j = 0; j < G; ++j)
            for (int a : at[std::size_t(i) * G + j])
                for (int di = 0; di <= reach; ++di)
                    for (int dj = -reach; dj <= reach; ++dj) {
                        if (di == 0 && dj < 0) continue;
                        const int ii = i + di, jj = j + dj;
                        if (ii >= G || jj < 0 || jj >= G) continue;
                        for (int b : at[std::size_t(ii) * G + jj]) {
                            if (b == a) continue;
                            const double dx = (nodes_[a].x - nodes_[b].x).norm();
                            const double dt = (unit(nodes_[a]) - unit(nodes_[b])).norm();
                            if (std::hypot(dx, dt) <= gate) link(a, b);
                        }
                    }

    // Saddle sheets are steep next to folds; neighbouring grid nodes there
    // are linked when a lift along the grid edge joins them.
    std::vector<std::vector<std::pair<int, int>>> found(nodes_.size());
    detail::parallel_for(nodes_.size(), s.threads, [&](std::size_t a) {
        const Node& na = nodes_[a];
        for (auto [di, dj] : {std::pair{1, 0}, std::pair{0, 1}}) {
            const int ii = na.gi + di, jj = na.gj + dj;
            if (ii >= G || jj >= G) continue;
            const auto& targets = at[std::size_t(ii) * G + jj];
            if (targets.empty()) continue;
            try {
                const auto lc = lift_curve(f, {na.theta, nodes_[targets.front()].theta}, na.x, s);
                if (!lc.stability.back().is_saddle(1)) continue;
                for (int b : targets)
                    if ((nodes_[b].x - lc.fiber.back()).norm() <= 1e-6 * (1.0 + lc.fiber.back().norm()))
                        found[a].push_back({int(a), b});
            } catch (const Error&) {
            }
        }
    });
    for (const auto& v : found)
        for (auto [a, b] : v) link(a, b);
}

int SaddleCloud::find(int i) const {
    while (parent_[i] != i) {
        parent_[i] = parent_[parent_[i]];
        i = parent_[i];
    }
    return i;
}

int SaddleCloud::component(int node) const { return find(node); }

std::optional<int> SaddleCloud::attach(const Vec& x, const Param& theta) const {
    const int G = grid_;
    const Param u = f_->box.to_unit(theta) * double(G - 1);
    std::vector<std::pair<int, int>> cand;
    for (int i : {int(std::floor(u[0])), int(std::ceil(u[0]))})
        for (int j : {int(std::floor(u[1])), int(std::ceil(u[1]))})
            if (i >= 0 && j >= 0 && i < G && j < G &&
                std::find(cand.begin(), cand.end(), std::pair{i, j}) == cand.end())
                cand.push_back({i, j});
    std::sort(cand.begin(), cand.end(), [&](auto a, auto b) {
        return (Param(a.first, a.second) - u).norm() < (Param(b.first, b.second) - u).norm();
    });
    for (auto [i, j] : cand) {
        const Param th = f_->box.lo + Param(double(i) / (G - 1), double(j) / (G - 1)).cwiseProduct(f_->box.width());
        try {
            const auto lc = lift_curve(*f_, {theta, th}, x, s_);
            if (!lc.stability.back().is_saddle(1)) continue;
            const Vec& xe = lc.fiber.back();
            for (int n : at_[std::size_t(i) * G + j])
                if ((nodes_[n].x - xe).norm() <= 1e-6 * (1.0 + xe.norm())) return n;
        } catch (const Error&) {
        }
    }
    return std::nullopt;
}

std::vector<int> SaddleCloud::path(int from, int to) const {
    std::vector<int> prev(nodes_.size(), -1);
    std::deque<int> queue{from};
    prev[from] = from;
    while (!queue.empty()) {
        const int a = queue.front();
        queue.pop_front();
        if (a == to) break;
        for (int b : adjacent_[a])
            if (prev[b] < 0) {
                prev[b] = a;
                queue.push_back(b);
            }
    }
    if (prev[to] < 0) return {};
    std::vector<int> out{to};
    while (out.back() != from) out.push_back(prev[out.back()]);
    std::reverse(out.begin(), out.end());
    return out;
}

namespace {

// 1-saddle equilibria just off a fold, on the side where two equilibria exist.
std::vector<BranchPoint> saddle_side(const FamilySpec& f, const FoldPoint& p, double eps, const Settings& s) {
    std::vector<BranchPoint> out;
    if (p.nullpair.bt_flag || !std::isfinite(p.a_coeff) || std::abs(p.a_coeff) < s.cusp_trigger) return out;
    const Vec g = jacobian_theta(f, p.x, p.theta).transpose() * p.nullpair.p;
    if (g.norm() < 1e-12) return out;
    const double sa = p.a_coeff > 0 ? 1.0 : -1.0;
    const Param dt = -sa * eps * g.normalized();
    const double xi = std::sqrt(eps * g.norm() / std::abs(p.a_coeff));
    if (xi > 0.2) return out;
    const Param th = p.theta + dt;
    if (!f.box.contains(th, 1e-12)) return out;
    for (double side : {1.0, -1.0}) {
        try {
            const Vec x = refine_equilibrium(f, p.x + side * xi * p.nullpair.q, th, s);
            if ((x - p.x).norm() > 4 * xi) continue;
            auto bp = classify_point(f, x, th, s);
            if (bp.stability.is_saddle(1)) out.push_back(std::move(bp));
        } catch (const Error&) {
        }
    }
    return out;
}

std::optional<int> attach_saddle_arc(const SaddleCloud& cloud, const SZReport& sz) {
    const auto& arc = sz.saddle_arc().points;
    // middle of the arc first, then outward
    std::vector<std::size_t> order;
    const std::size_t mid = arc.size() / 2;
    for (std::size_t k = 0; k < arc.size(); ++k) {
        if (mid + k < arc.size()) order.push_back(mid + k);
        if (k > 0 && k <= mid) order.push_back(mid - k);
    }
    for (std::size_t i : order)
        if (auto n = cloud.attach(arc[i].x, arc[i].theta)) return n;
    return std::nullopt;
}

} // namespace

MembershipEvidence saddle_component_membership(const FamilySpec& f, const FoldCurveRecord& curve,
                                               const SZReport& sz, const Settings& s, const SaddleCloud& cloud) {
    MembershipEvidence ev;
    ev.curve_id = curve.id;
    ev.resolution = cloud.grid();
    const auto target = attach_saddle_arc(cloud, sz);
    if (!target)
        throw InconclusiveMembership("boundary saddle arc does not attach to the sampled saddle cloud at grid " +
                                     std::to_string(cloud.grid()));
    const int target_comp = cloud.component(*target);
    const double eps = 0.25 * f.box.width().minCoeff() / (cloud.grid() - 1);

    bool attached = false;
    for (std::size_t k = 0; k < curve.points.size(); ++k) {
        for (const auto& bp : saddle_side(f, curve.points[k], eps, s)) {
            const auto n = cloud.attach(bp.x, bp.theta);
            if (!n) continue;
            if (!attached) ev.fold_index = int(k);
            attached = true;
            if (cloud.component(*n) != target_comp) continue;
            ev.member = true;
            ev.fold_index = int(k);
            ev.witness.push_back({bp.x, bp.theta});
            for (int i : cloud.path(*n, *target)) ev.witness.push_back({cloud.nodes()[i].x, cloud.nodes()[i].theta});
            ev.note = "saddle side of fold " + std::to_string(k) + " connects to the boundary saddle arc";
            return ev;
        }
    }
    if (!attached)
        throw InconclusiveMembership("no fold of curve " + std::to_string(curve.id) +
                                     " attaches to the saddle cloud at grid " + std::to_string(cloud.grid()) +
                                     " near theta = " + fmt_param(curve.points.front().theta));
    ev.note = "saddle side lies in a component other than the boundary saddle arc's";
    return ev;
}

MembershipEvidence saddle_component_membership(const FamilySpec& f, const FoldCurveRecord& curve,
                                               const SZReport& sz, const Settings& s) {
    int grid = s.member_grid;
    for (int level = 0;; ++level) {
        const SaddleCloud cloud(f, s, grid);
        try {
            return saddle_component_membership(f, curve, sz, s, cloud);
        } catch (const InconclusiveMembership&) {
            if (level >= s.member_escalations) throw;
        }
        grid = 2 * grid - 1;
    }
}

CuspTally count_cusps(const std::vector<FoldCurveRecord>& members) {
    CuspTally t;
    for (const auto& c : members) {
        const int n = int(c.cusp_count());
        t.total += n;
        t.bt += int(c.count(Codim2Kind::bogdanov_takens));
        t.per_curve.push_back({c.id, n});
    }
    return t;
}

namespace {

bool same_fold(const FamilySpec& f, const FoldPoint& a, const FoldPoint& b) {
    return (f.box.to_unit(a.theta) - f.box.to_unit(b.theta)).norm() < 1e-6 && (a.x - b.x).norm() < 1e-5 * (1 + a.x.norm());
}

// Main-curve points ordered from x1 to x2, or nullopt if the curve does
// not join them.
std::optional<std::vector<FoldPoint>> oriented_main(const FamilySpec& f, const FoldCurveRecord& c,
                                                    const SZReport& sz) {
    if (c.closed || c.points.size() < 2 || sz.folds.size() != 2) return std::nullopt;
    const auto &a = c.points.front(), &b = c.points.back();
    if (same_fold(f, a, sz.folds[0]) && same_fold(f, b, sz.folds[1])) return c.points;
    if (same_fold(f, b, sz.folds[0]) && same_fold(f, a, sz.folds[1]))
        return std::vector<FoldPoint>(c.points.rbegin(), c.points.rend());
    return std::nullopt;
}

} // namespace

int orientation_switches(const std::vector<FoldPoint>& points) {
    int n = 0, last = 0;
    for (const auto& p : points) {
        if (p.orientation == 0) continue;
        if (last != 0 && p.orientation != last) ++n;
        last = p.orientation;
    }
    return n;
}

Traversal traversal_switch_count(const FamilySpec& f, const FoldCurveRecord& main_curve, const SZReport& sz,
                                 const Settings& s) {
    const auto pts = oriented_main(f, main_curve, sz);
    if (!pts) throw TransportBroken("curve " + std::to_string(main_curve.id) + " does not join the boundary folds");
    Traversal t;
    t.switch_count = orientation_switches(*pts);
    for (std::size_t i = 1; i < pts->size(); ++i)
        if ((*pts)[i].nullpair.q.dot((*pts)[i - 1].nullpair.q) < s.transport_gate)
            throw TransportBroken("centre direction jumps along curve " + std::to_string(main_curve.id));

    // Back along the saddle arc from x2 to x1, inheriting x2's orientation.
    const auto& first = pts->front();
    const auto& end = pts->back();
    const Vec w1 = double(first.orientation) * first.nullpair.q;
    const Vec w2 = double(end.orientation) * end.nullpair.q;
    std::vector<BranchPoint> arc(sz.saddle_arc().points.rbegin(), sz.saddle_arc().points.rend());
    const auto v = transport_unstable(f, arc, s, w2);
    const double sign = v.front().dot(w2) >= 0 ? 1.0 : -1.0;
    t.closure_discontinuity = sign * v.back().dot(w1) < 0;
    return t;
}

PipelineResult run_pipeline(const FamilySpec& f, const Settings& s) {
    PipelineResult out;
    out.sz = boundary_scan(f, s);
    if (!out.sz.opposed) throw SZViolation("the two boundary folds are not opposed");
    if (out.sz.opposed_by_flow && *out.sz.opposed_by_flow != out.sz.opposed)
        throw CrossCheckFailure("opposedness by potential slope and by flow orientation disagree");

    out.curves = enumerate_fold_curves(f, s);
    auto& v = out.verdict;
    v.scan_grid = s.grid;
    v.notes.push_back("fold-curve discovery resolution: grid " + std::to_string(s.grid) + " with " +
                      std::to_string(s.restarts) + " restarts");

    int grid = s.member_grid;
    std::optional<SaddleCloud> cloud;
    for (int level = 0;; ++level) {
        cloud.emplace(f, s, grid);
        v.membership.clear();
        try {
            for (const auto& c : out.curves) v.membership.push_back(saddle_component_membership(f, c, out.sz, s, *cloud));
            break;
        } catch (const InconclusiveMembership&) {
            if (level >= s.member_escalations) throw;
        }
        grid = 2 * grid - 1;
    }
    v.membership_grid = grid;

    std::vector<FoldCurveRecord> members;
    for (std::size_t i = 0; i < out.curves.size(); ++i)
        if (v.membership[i].member) {
            members.push_back(out.curves[i]);
            v.member_ids.push_back(out.curves[i].id);
            for (const auto& m : out.curves[i].codim2_points)
                if (m.kind == Codim2Kind::fold_hopf) v.fh_points.push_back(m);
        }
    v.fh_found = !v.fh_points.empty();
    const auto tally = count_cusps(members);
    v.cusp_count_total = tally.total;
    v.bt_count = tally.bt;
    v.parity = tally.total % 2 ? Parity::odd : Parity::even;

    for (const auto& c : members) {
        if (!oriented_main(f, c, out.sz)) continue;
        v.main_curve_id = c.id;
        const auto t = traversal_switch_count(f, c, out.sz, s);
        v.switch_count = t.switch_count;
        v.closure_discontinuity = t.closure_discontinuity;
        const int main_cusps = int(c.cusp_count());
        std::ostringstream diag;
        diag << "curve " << c.id << ": " << t.switch_count << " orientation switches, " << main_cusps
             << " cusps, closure discontinuity " << (t.closure_discontinuity ? 1 : 0);
        if (t.switch_count % 2 != main_cusps % 2)
            throw CrossCheckFailure("switch count and cusp count disagree in parity; " + diag.str());
        if ((t.switch_count + (t.closure_discontinuity ? 1 : 0)) % 2 != 0)
            throw CrossCheckFailure("orientation does not return consistently around the loop; " + diag.str());
        v.notes.push_back(diag.str());
        break;
    }
    if (!v.main_curve_id) v.notes.push_back("no member curve joins the two boundary folds; traversal skipped");

    v.theorem_satisfied = v.fh_found || v.parity == Parity::odd;
    return out;
}

ParityVerdict theorem_verdict(const FamilySpec& f, const Settings& s) { return run_pipeline(f, s).verdict; }

} // namespace cusparity
