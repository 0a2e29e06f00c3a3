#pragma once

#include "cusparity/family.hpp"
#include "cusparity/settings.hpp"
#include "cusparity/types.hpp"

#include <vector>

namespace cusparity {

struct OracleCusp {
    double x = 0.0;
    Param theta = Param::Zero();
    /// Sign of the cubic coefficient: -1 standard, +1 dual.
    int sign = 0;
};

/// Closed-form fold set of x' = t2 + t1 g(x) + h(x), clipped to the box.
struct OracleResult {
    /// Connected pieces of the fold set inside the box, in increasing x.
    std::vector<ParamPolyline> pieces;
    std::vector<std::vector<double>> piece_x;
    std::vector<OracleCusp> cusps;
    /// Sample states dropped because g'(x) vanishes there.
    std::vector<double> excluded;
    std::size_t samples = 0;
    double x_lo = 0.0, x_hi = 0.0;

    std::size_t cusp_count() const { return cusps.size(); }
};

/// Sweeps oracle_points states over the state range and solves F = F_x = 0
/// in closed form. Throws NotParameterLinear.
OracleResult parameter_linear_oracle(const FamilySpec& f, const Settings& s);

struct OracleDiff {
    double hausdorff = 0.0;
    std::size_t oracle_cusps = 0;
    std::size_t continuation_cusps = 0;
    /// Largest distance between matched cusp locations, box-scaled.
    double max_cusp_error = 0.0;
    std::size_t oracle_curves = 0;
    std::size_t continuation_curves = 0;

    bool agrees(double hausdorff_tol = 1e-4, double cusp_tol = 1e-6) const;
};

/// Densifies the continued curves and compares them with the oracle.
OracleDiff compare_with_oracle(const FamilySpec& f, const OracleResult& oracle,
                               const std::vector<FoldCurveRecord>& curves, const Settings& s);

} // namespace cusparity
