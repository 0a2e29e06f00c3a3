#pragma once

#include "cusparity/numerics.hpp"

#include <optional>

namespace cusparity::detail {

// Pseudo-arclength machinery for R: R^N -> R^(N-1). Distances and
// tangents live in scaled coordinates v = u ./ scale.
struct ArcSystem {
    ResidualFn residual;
    Vec scale;

    Mat jacobian(const Vec& u) const;
    /// Unit kernel direction of the scaled Jacobian, oriented along ref.
    Vec tangent(const Vec& u, const Vec& ref) const;
    /// Kernel direction from an SVD; nullopt when the kernel is not 1-D.
    std::optional<Vec> initial_tangent(const Vec& u) const;
    double distance(const Vec& a, const Vec& b) const { return ((a - b).cwiseQuotient(scale)).norm(); }
};

struct Corrected {
    Vec u;
    int iterations = 0;
};

std::optional<Corrected> correct(const ArcSystem& sys, const Vec& u_prev, const Vec& tangent, double h, double tol,
                                 int maxit = 8);

/// Newton on R(u) = 0 augmented by one extra scalar equation.
std::optional<Vec> solve_augmented(const ResidualFn& residual, const std::function<double(const Vec&)>& extra,
                                   Vec u0, double tol, int maxit = 15);

} // namespace cusparity::detail
