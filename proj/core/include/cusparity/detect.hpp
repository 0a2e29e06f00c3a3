#pragma once

#include "cusparity/family.hpp"
#include "cusparity/numerics.hpp"
#include "cusparity/settings.hpp"
#include "cusparity/types.hpp"

#include <optional>
#include <vector>

namespace cusparity {

StabilityClass classify_equilibrium(const Spectrum& s, double hyp_gate = 1e-8);

/// a = <p, B(q,q)> / 2 with <p,q> = 1. Flipping q flips a, so sign(a) q
/// is well defined.
double fold_coefficient_a(const FamilySpec& f, const Vec& x, const Param& theta, const NullPair& np);

/// Cubic coefficient of the centre-manifold reduction,
/// c = <p, C(q,q,q) - 3 B(q, J^+ B(q,q))> / 6. Negative for the cusp of
/// x' = t2 + t1 x - x^3.
double cusp_coefficient_c(const FamilySpec& f, const Vec& x, const Param& theta, const NullPair& np,
                          double cusp_gate = 1e-8);

/// Test functions along a fold curve, evaluated with a transported unit
/// left null vector. `fold_hopf` is NaN when no complex pair exists.
struct TestFunctions {
    double cusp = 0.0;
    double bt = 0.0;
    double fold_hopf = 0.0;
};
TestFunctions test_functions(const FamilySpec& f, const Vec& x, const Vec& q, const Vec& p_unit, const Param& theta,
                             double hopf_gate);

/// Unit left null vector of J continued from p_ref.
Vec transport_left_null(const Mat& J, const Vec& q, const Vec& p_ref);

/// Builds a fold point from a solution of the fold system. Without p_ref the
/// left null vector is oriented so that <p,q> >= 0.
FoldPoint make_fold_point(const FamilySpec& f, const Vec& x, const Vec& q, const Param& theta, const Settings& s,
                          const Vec* p_ref = nullptr);

/// Refines the codim-2 points bracketed by two consecutive samples of a
/// fold curve. Throws RefinementFailed, or DegenerateCusp for a vanishing
/// cubic coefficient.
std::vector<Codim2Point> classify_codim2(const FamilySpec& f, const FoldPoint& a, const FoldPoint& b,
                                         const Settings& s);

struct OrientedTangent {
    Vec q;
    /// +1 or -1 relative to q; 0 when unset.
    int direction = 0;
};

/// Eigenvector of the unique real eigenvalue nearest the imaginary axis,
/// provided the spectral gap exceeds gap_min.
OrientedTangent centre_tangent(const FamilySpec& f, const Vec& x, const Param& theta, const Settings& s,
                               const Vec* reference = nullptr);

/// Unit eigenvector of the largest real eigenvalue, aligned with reference.
Vec unstable_direction(const Mat& J, const Vec* reference = nullptr);

/// Flow direction on the centre manifold near a fold: sign(a) along q.
OrientedTangent fold_orientation(const FamilySpec& f, const FoldPoint& fold, const Settings& s);

/// Linear map taking normal-form parameters of x' = t2 + t1 x - x^3 to
/// parameter offsets from the cusp, fitted from nearby fold points.
Mat2 cusp_frame(const FamilySpec& f, const Codim2Point& cusp, const Vec& q, const Settings& s);

enum class SheetPattern { standard, dual, unknown };

/// Indices of the three equilibria that merge at the cusp, sampled inside
/// the cusp region.
SheetPattern cusp_sheet_pattern(const FamilySpec& f, const Codim2Point& cusp, const Vec& q, const Mat2& frame,
                                const Settings& s);

} // namespace cusparity
