#pragma once

#include "cusparity/family.hpp"
#include "cusparity/linalg.hpp"
#include "cusparity/numerics.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cusparity {

enum class Stability { attractor, saddle, nonhyperbolic };

struct StabilityClass {
    Stability kind = Stability::nonhyperbolic;
    /// Number of eigenvalues with positive real part.
    int index = 0;

    bool is_saddle(int k) const { return kind == Stability::saddle && index == k; }
    bool operator==(const StabilityClass&) const = default;
};

std::string to_string(const StabilityClass& c);

/// An equilibrium sample on a branch. `s` is the path coordinate.
struct BranchPoint {
    Vec x;
    Param theta = Param::Zero();
    double s = 0.0;
    Spectrum spectrum;
    StabilityClass stability;
};

enum class Codim2Kind { cusp_standard, cusp_dual, bogdanov_takens, fold_hopf };

std::string_view to_string(Codim2Kind k);
Codim2Kind codim2_kind_from_string(std::string_view s);

struct Codim2Point {
    Codim2Kind kind = Codim2Kind::cusp_standard;
    Vec x;
    Param theta = Param::Zero();
    /// Unit right null vector at the point.
    Vec q;
    /// Fold coefficient with <p,q> = 1 (infinite at BT).
    double a_coeff = 0.0;
    /// Cubic coefficient; cusps only.
    double c_coeff = 0.0;
    /// Inner product of the unit null vectors.
    double pq = 0.0;
    /// Real and imaginary part of the monitored complex pair; fold-Hopf only.
    double pair_real = 0.0;
    double pair_imag = 0.0;
    /// Norm of the augmented residual at acceptance.
    double residual = 0.0;
    /// Maps normal-form parameters into the box; cusps only.
    std::optional<Mat2> frame;
    double arclength = 0.0;
    /// "sheets" or "coefficient"; cusps only.
    std::string classified_by;
    bool conflict = false;
};

struct FoldPoint {
    Vec x;
    Param theta = Param::Zero();
    NullPair nullpair;
    /// Left null vector of unit length, transported along the curve.
    Vec p_unit;
    double a_coeff = 0.0;
    /// Sign of the transported cusp test function; 0 exactly at a cusp.
    int orientation = 0;
    double psi_cusp = 0.0;
    double psi_bt = 0.0;
    /// Real part of the complex pair nearest the imaginary axis; NaN if none.
    double psi_fh = 0.0;
    double arclength = 0.0;
};

struct FoldCurveRecord {
    int id = 0;
    std::vector<FoldPoint> points;
    bool closed = false;
    std::optional<Edge> start_edge;
    std::optional<Edge> end_edge;
    double arclength = 0.0;
    std::vector<Codim2Point> codim2_points;
    std::vector<std::string> notes;

    ParamPolyline parameters() const;
    std::size_t count(Codim2Kind k) const;
    std::size_t cusp_count() const { return count(Codim2Kind::cusp_standard) + count(Codim2Kind::cusp_dual); }
};

struct LiftedCurve {
    ParamPolyline base;
    std::vector<Vec> fiber;
    std::vector<StabilityClass> stability;
    bool closed_base = false;
    bool simple = false;
    /// State distance between the first and last sample.
    double end_gap = 0.0;
};

} // namespace cusparity
