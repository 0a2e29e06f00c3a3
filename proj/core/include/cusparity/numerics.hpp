#pragma once

#include "cusparity/linalg.hpp"

#include <complex>
#include <functional>
#include <vector>

namespace cusparity {

/// Eigenvalues sorted by ascending real part, ties by ascending imaginary part.
struct Spectrum {
    std::vector<std::complex<double>> eigenvalues;
    /// |Re| of the runner-up over |Re| of the eigenvalue closest to the
    /// imaginary axis; infinite when that eigenvalue sits on the axis.
    double gap_ratio = 0.0;

    std::size_t size() const { return eigenvalues.size(); }
    /// Eigenvalue of smallest modulus.
    std::complex<double> nearest_zero() const;
    double min_abs_real() const;
};

Vec solve_linear(const Mat& A, const Vec& b);
Spectrum spectrum(const Mat& A);

/// Unit right null direction q and left null direction p. When
/// |<p,q>| > bt_gate, p is scaled so that <p,q> = 1; otherwise p stays
/// unit and bt_flag is set. `pq` is always the inner product of the unit
/// vectors, with p's sign chosen so that pq >= 0.
struct NullPair {
    Vec q;
    Vec p;
    double pq = 0.0;
    bool bt_flag = false;
};

NullPair null_pair(const Mat& A, double null_gate = 1e-6, double bt_gate = 1e-4);

/// Unit eigenvector for a real eigenvalue by shifted inverse iteration.
Vec real_eigenvector(const Mat& A, double lambda);

/// Null vectors from bordered systems, regular even at a double zero
/// eigenvalue. Both returned vectors are unit and sign-aligned with the
/// references.
struct BorderedNull {
    Vec q;
    Vec p;
};
BorderedNull bordered_null_vectors(const Mat& J, const Vec& q_ref, const Vec& p_ref);

using ResidualFn = std::function<Vec(const Vec&)>;
using JacobianFn = std::function<Mat(const Vec&)>;

struct NewtonOptions {
    double tol = 1e-10;
    int max_iter = 50;
    int max_halvings = 20;
};

/// Damped Newton: the step is halved while it increases the residual norm.
/// Throws MaxIter when the tolerance is not reached.
Vec newton_solve(const ResidualFn& residual, const JacobianFn& jacobian, Vec x0, const NewtonOptions& opt = {});

/// Gauss-Newton with minimum-norm steps for underdetermined systems; lands
/// on the nearest point of the solution set.
Vec newton_minimum_norm(const ResidualFn& residual, const JacobianFn& jacobian, Vec x0,
                        const NewtonOptions& opt = {});

/// Central-difference Jacobian with step rel_step * (1 + |u_j|).
Mat fd_jacobian(const ResidualFn& residual, const Vec& u, double rel_step = 1e-6);

} // namespace cusparity
