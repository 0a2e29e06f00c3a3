#include "cusparity/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace cusparity {

namespace {

double segment_distance(const Param& p, const Param& a, const Param& b) {
    const Param d = b - a;
    const double dd = d.squaredNorm();
    const double t = dd > 0 ? std::clamp((p - a).dot(d) / dd, 0.0, 1.0) : 0.0;
    return (p - (a + t * d)).norm();
}

// Uniform grid over segment bounding boxes; queries search rings of cells
// outward until the ring is farther than the best hit.
class SegmentGrid {
public:
    explicit SegmentGrid(const ParamPolyline& pts) : pts_(pts) {
        double total = 0.0;
        for (std::size_t i = 1; i < pts.size(); ++i) total += (pts[i] - pts[i - 1]).norm();
        cell_ = pts.size() > 1 ? std::max(total / double(pts.size() - 1), 1e-9) : 1.0;
        if (pts.size() == 1) insert(0, pts[0], pts[0]);
        for (std::size_t i = 1; i < pts.size(); ++i) insert(i, pts[i - 1], pts[i]);
    }

    double distance(const Param& p) const {
        const long ci = cell(p[0]), cj = cell(p[1]);
        double best = std::numeric_limits<double>::infinity();
        for (long r = 0;; ++r) {
            for (long i = ci - r; i <= ci + r; ++i)
                for (long j = cj - r; j <= cj + r; ++j) {
                    if (std::max(std::abs(i - ci), std::abs(j - cj)) != r) continue;
                    auto it = cells_.find(key(i, j));
                    if (it == cells_.end()) continue;
                    for (std::size_t s : it->second) best = std::min(best, seg(s, p));
                }
            if (best <= double(r) * cell_) return best;
            if (r > max_ring_) return best;
        }
    }

private:
    long cell(double v) const { return long(std::floor(v / cell_)); }
    static long long key(long i, long j) { return (static_cast<long long>(i) << 32) ^ (j & 0xffffffffLL); }

    void insert(std::size_t s, const Param& a, const Param& b) {
        const long i0 = cell(std::min(a[0], b[0])), i1 = cell(std::max(a[0], b[0]));
        const long j0 = cell(std::min(a[1], b[1])), j1 = cell(std::max(a[1], b[1]));
        for (long i = i0; i <= i1; ++i)
            for (long j = j0; j <= j1; ++j) cells_[key(i, j)].push_back(s);
        max_ring_ = std::max(max_ring_, std::max(i1 - i0, j1 - j0));
        lo_ = std::min(lo_, std::min(i0, j0));
        hi_ = std::max(hi_, std::max(i1, j1));
        max_ring_ = std::max(max_ring_, hi_ - lo_ + 2);
    }

    double seg(std::size_t s, const Param& p) const {
        return s == 0 ? (p - pts_[0]).norm() : segment_distance(p, pts_[s - 1], pts_[s]);
    }

    const ParamPolyline& pts_;
    double cell_ = 1.0;
    long max_ring_ = 0, lo_ = 0, hi_ = 0;
    std::unordered_map<long long, std::vector<std::size_t>> cells_;
};

ParamPolyline to_unit(const ParamPolyline& line, const ParamBox& box) {
    ParamPolyline out;
    out.reserve(line.size());
    for (const auto& p : line) out.push_back(box.to_unit(p));
    return out;
}

} // namespace

double point_polyline_distance(const Param& p, const ParamPolyline& line, const ParamBox& box) {
    if (line.empty()) return std::numeric_limits<double>::infinity();
    const ParamPolyline u = to_unit(line, box);
    return SegmentGrid(u).distance(box.to_unit(p));
}

double hausdorff_distance(const ParamPolyline& a, const ParamPolyline& b, const ParamBox& box) {
    if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
    const ParamPolyline ua = to_unit(a, box), ub = to_unit(b, box);
    const SegmentGrid ga(ua), gb(ub);
    double worst = 0.0;
    for (const auto& p : ua) worst = std::max(worst, gb.distance(p));
    for (const auto& p : ub) worst = std::max(worst, ga.distance(p));
    return worst;
}

double hausdorff_distance(const std::vector<ParamPolyline>& a, const std::vector<ParamPolyline>& b,
                          const ParamBox& box) {
    if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
    auto directed = [&](const std::vector<ParamPolyline>& from, const std::vector<ParamPolyline>& to) {
        std::vector<ParamPolyline> units;
        for (const auto& l : to) units.push_back(to_unit(l, box));
        std::vector<SegmentGrid> grids;
        grids.reserve(units.size());
        for (const auto& u : units) grids.emplace_back(u);
        double worst = 0.0;
        for (const auto& l : from)
            for (const auto& p : l) {
                const Param pu = box.to_unit(p);
                double best = std::numeric_limits<double>::infinity();
                for (const auto& g : grids) best = std::min(best, g.distance(pu));
                worst = std::max(worst, best);
            }
        return worst;
    };
    return std::max(directed(a, b), directed(b, a));
}

} // namespace cusparity
