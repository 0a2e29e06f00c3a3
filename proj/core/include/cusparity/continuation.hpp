#pragma once

#include "cusparity/family.hpp"
#include "cusparity/settings.hpp"
#include "cusparity/types.hpp"

#include <string>
#include <vector>

namespace cusparity {

/// Fold-system unknowns are packed as u = (x, q, theta).
Vec pack_fold(const Vec& x, const Vec& q, const Param& theta);
Vec fold_state(const Vec& u, int n);
Vec fold_direction(const Vec& u, int n);
Param fold_parameters(const Vec& u, int n);

/// (X(x,theta), J(x,theta) q, <q,q> - 1).
Vec fold_residual(const FamilySpec& f, const Vec& x, const Vec& q, const Param& theta);
Vec fold_residual(const FamilySpec& f, const Vec& u);

/// A polyline in the parameter plane parametrised by arclength measured
/// after mapping the box onto the unit square.
class ParamPath {
public:
    ParamPath(ParamPolyline vertices, const ParamBox& box);

    Param at(double s) const;
    double length() const { return cumulative_.back(); }
    bool closed() const;
    const ParamPolyline& vertices() const { return vertices_; }

private:
    ParamPolyline vertices_;
    std::vector<double> cumulative_;
};

struct FoldEvent {
    FoldPoint fold;
    double s = 0.0;
};

struct HopfEvent {
    Vec x;
    Param theta = Param::Zero();
    double s = 0.0;
};

struct Branch {
    std::vector<BranchPoint> points;
    std::vector<FoldEvent> folds;
    std::vector<HopfEvent> hopfs;
};

/// Pseudo-arclength continuation of equilibria in (x, s) along a path,
/// starting from an equilibrium at path coordinate s0 in the given
/// direction. Stops where the branch leaves [0, length]. Throws BranchLost
/// and BoundaryExit.
Branch continue_equilibria_along_path(const FamilySpec& f, const ParamPath& path, const Vec& seed,
                                      const Settings& s, double s0 = 0.0, int direction = +1);

/// Traces both directions from an interior seed and joins the halves in
/// increasing path order.
Branch trace_branch(const FamilySpec& f, const ParamPath& path, const Vec& seed, double s0, const Settings& s);

/// Lands on the nearest fold point by minimum-norm Gauss-Newton on the
/// fold system. Throws SeedDegenerate.
FoldPoint refine_fold_seed(const FamilySpec& f, const Vec& x0, const Vec& q0, const Param& theta0,
                           const Settings& s);

FoldCurveRecord continue_fold_curve(const FamilySpec& f, const FoldPoint& seed, const Settings& s);

struct EnumerationLog {
    std::size_t seeds = 0;
    std::size_t refined = 0;
    std::vector<std::string> failures;
};

std::vector<FoldCurveRecord> enumerate_fold_curves(const FamilySpec& f, const Settings& s,
                                                   EnumerationLog* log = nullptr);

/// Inserts corrected fold points until consecutive parameter samples are
/// at most max_gap apart in the curve's (x, box-scaled theta) metric.
FoldCurveRecord densify(const FamilySpec& f, const FoldCurveRecord& curve, double max_gap, const Settings& s);

/// Tracks the equilibrium through `seed` along base. Throws FoldOnPath and
/// BranchLost.
LiftedCurve lift_curve(const FamilySpec& f, const ParamPolyline& base, const Vec& seed, const Settings& s);

/// Image of y -> (3y^2 - a, -2y^3 + a y) under the cusp frame, y in
/// [-span, span]. Positive amplitude a loops around the cusp point,
/// negative amplitude stays inside the cusp region.
ParamPolyline approximating_curve(const Codim2Point& cusp, double amplitude, double span, int samples = 401);

/// Closed versions: the looping curve between its self-intersection, the
/// nudging curve closed by a segment inside the cusp region.
ParamPolyline closed_approximating_curve(const Codim2Point& cusp, double amplitude, double span, int samples = 401);
/// First-order state on the lifted sheet at the first sample of the closed
/// curve.
Vec approximating_curve_seed(const Codim2Point& cusp, double amplitude, double span);

/// Symmetric Hausdorff distance between polylines, box-scaled.
double hausdorff_distance(const ParamPolyline& a, const ParamPolyline& b, const ParamBox& box);
/// Same, between two sets of polylines.
double hausdorff_distance(const std::vector<ParamPolyline>& a, const std::vector<ParamPolyline>& b,
                          const ParamBox& box);
double point_polyline_distance(const Param& p, const ParamPolyline& line, const ParamBox& box);

} // namespace cusparity
