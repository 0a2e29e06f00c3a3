#include "cusparity/types.hpp"

#include "cusparity/errors.hpp"

namespace cusparity {

std::string to_string(const StabilityClass& c) {
    switch (c.kind) {
    case Stability::attractor:
        return "attractor";
    case Stability::saddle:
        return std::to_string(c.index) + "-saddle";
    case Stability::nonhyperbolic:
        break;
    }
    return "nonhyperbolic";
}

std::string_view to_string(Codim2Kind k) {
    switch (k) {
    case Codim2Kind::cusp_standard:
        return "cusp_standard";
    case Codim2Kind::cusp_dual:
        return "cusp_dual";
    case Codim2Kind::bogdanov_takens:
        return "bogdanov_takens";
    case Codim2Kind::fold_hopf:
        return "fold_hopf";
    }
    return "?";
}

Codim2Kind codim2_kind_from_string(std::string_view s) {
    for (auto k : {Codim2Kind::cusp_standard, Codim2Kind::cusp_dual, Codim2Kind::bogdanov_takens,
                   Codim2Kind::fold_hopf})
        if (to_string(k) == s) return k;
    throw ParseError("unknown codim-2 kind '" + std::string(s) + "'");
}

ParamPolyline FoldCurveRecord::parameters() const {
    ParamPolyline out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(p.theta);
    return out;
}

std::size_t FoldCurveRecord::count(Codim2Kind k) const {
    std::size_t n = 0;
    for (const auto& c : codim2_points) n += c.kind == k ? 1 : 0;
    return n;
}

} // namespace cusparity
