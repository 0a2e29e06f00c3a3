#pragma once

#include "cusparity/family.hpp"
#include "cusparity/settings.hpp"
#include "cusparity/types.hpp"

#include <cstdint>
#include <vector>

namespace cusparity {

/// Half-width of the cube of states probed by multi-start searches.
double state_radius(const FamilySpec& f, const Settings& s);
/// Equilibria with larger norm are treated as runaway.
double state_cap(const FamilySpec& f, const Settings& s);

Vec refine_equilibrium(const FamilySpec& f, const Vec& x0, const Param& theta, const Settings& s);

/// Spectrum and stability class of the equilibrium x at theta.
BranchPoint classify_point(const FamilySpec& f, const Vec& x, const Param& theta, const Settings& s,
                           double path_s = 0.0);

/// Multi-start Newton with deflation against the roots already found.
/// `stream` selects an independent reproducible random sequence. Roots are
/// returned in lexicographic order.
std::vector<Vec> find_equilibria(const FamilySpec& f, const Param& theta, const Settings& s, std::uint64_t stream,
                                 int restarts = -1);

std::vector<BranchPoint> equilibria_at(const FamilySpec& f, const Param& theta, const Settings& s,
                                       std::uint64_t stream, int restarts = -1);

} // namespace cusparity
