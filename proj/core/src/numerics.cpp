#include "cusparity/numerics.hpp"

#include "cusparity/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cusparity {

namespace {

double matrix_scale(const Mat& A) { return A.cwiseAbs().rowwise().sum().maxCoeff(); }

struct LU {
    Mat lu;
    std::vector<Eigen::Index> perm;
    double min_pivot = std::numeric_limits<double>::infinity();
};

// Row-pivoted LU. A non-zero floor replaces vanishing pivots so that
// inverse iteration can run on exactly singular matrices.
LU factor(const Mat& A, double pivot_floor) {
    const Eigen::Index n = A.rows();
    LU f{A, std::vector<Eigen::Index>(static_cast<std::size_t>(n))};
    for (Eigen::Index i = 0; i < n; ++i) f.perm[static_cast<std::size_t>(i)] = i;
    for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::Index piv = k;
        f.lu.col(k).tail(n - k).cwiseAbs().maxCoeff(&piv);
        piv += k;
        if (piv != k) {
            f.lu.row(k).swap(f.lu.row(piv));
            std::swap(f.perm[static_cast<std::size_t>(k)], f.perm[static_cast<std::size_t>(piv)]);
        }
        f.min_pivot = std::min(f.min_pivot, std::abs(f.lu(k, k)));
        if (std::abs(f.lu(k, k)) < pivot_floor) f.lu(k, k) = f.lu(k, k) < 0 ? -pivot_floor : pivot_floor;
        for (Eigen::Index i = k + 1; i < n; ++i) {
            f.lu(i, k) /= f.lu(k, k);
            f.lu.row(i).tail(n - k - 1) -= f.lu(i, k) * f.lu.row(k).tail(n - k - 1);
        }
    }
    return f;
}

Vec lu_solve(const LU& f, const Vec& b) {
    const Eigen::Index n = f.lu.rows();
    Vec y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double s = b[f.perm[static_cast<std::size_t>(i)]];
        for (Eigen::Index j = 0; j < i; ++j) s -= f.lu(i, j) * y[j];
        y[i] = s;
    }
    for (Eigen::Index i = n - 1; i >= 0; --i) {
        double s = y[i];
        for (Eigen::Index j = i + 1; j < n; ++j) s -= f.lu(i, j) * y[j];
        y[i] = s / f.lu(i, i);
    }
    return y;
}

Vec start_vector(Eigen::Index n) {
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = 1.0 + 0.1 * double(i);
    return v.normalized();
}

Vec inverse_iteration(const Mat& A, double shift) {
    const Eigen::Index n = A.rows();
    const Mat S = A - shift * Mat::Identity(n, n);
    const double scale = std::max(matrix_scale(A), 1e-300);
    const LU f = factor(S, 1e-14 * std::max(scale, 1.0));
    Vec v = start_vector(n);
    for (int it = 0; it < 20; ++it) {
        Vec w = lu_solve(f, v);
        const double nw = w.norm();
        if (!std::isfinite(nw) || nw == 0.0) break;
        w /= nw;
        if (w.dot(v) < 0) w = -w;
        const double change = (w - v).norm();
        v = w;
        if (it >= 2 && ((S * v).norm() <= 1e-12 * std::max(scale, 1.0) || change < 1e-15)) break;
    }
    return v;
}

void orient_lexicographic(Vec& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) > 1e-12) {
            if (v[i] < 0) v = -v;
            return;
        }
    }
}

} // namespace

std::complex<double> Spectrum::nearest_zero() const {
    return *std::min_element(eigenvalues.begin(), eigenvalues.end(),
                             [](auto a, auto b) { return std::abs(a) < std::abs(b); });
}

double Spectrum::min_abs_real() const {
    double m = std::numeric_limits<double>::infinity();
    for (auto l : eigenvalues) m = std::min(m, std::abs(l.real()));
    return m;
}

Vec solve_linear(const Mat& A, const Vec& b) {
    if (A.rows() != A.cols() || A.rows() != b.size()) throw SingularMatrix("solve_linear: shape mismatch");
    if (!A.allFinite() || !b.allFinite()) throw SingularMatrix("solve_linear: non-finite input");
    const double scale = matrix_scale(A);
    const LU f = factor(A, 0.0);
    if (scale == 0.0 || f.min_pivot < 1e-14 * scale) throw SingularMatrix("solve_linear: pivot below 1e-14 |A|");
    return lu_solve(f, b);
}

Spectrum spectrum(const Mat& A) {
    Spectrum s;
    const Eigen::Index n = A.rows();
    if (n == 1) {
        s.eigenvalues = {std::complex<double>(A(0, 0), 0.0)};
    } else {
        Eigen::EigenSolver<Mat> es(A, false);
        if (es.info() != Eigen::Success) throw NoConvergence("spectrum: eigenvalue iteration did not converge");
        for (Eigen::Index i = 0; i < n; ++i) s.eigenvalues.push_back(es.eigenvalues()[i]);
    }
    std::sort(s.eigenvalues.begin(), s.eigenvalues.end(), [](auto a, auto b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    if (n == 1) {
        s.gap_ratio = std::numeric_limits<double>::infinity();
        return s;
    }
    std::vector<double> re;
    for (auto l : s.eigenvalues) re.push_back(std::abs(l.real()));
    std::sort(re.begin(), re.end());
    s.gap_ratio = re[0] > 0.0 ? re[1] / re[0] : (re[1] > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
    return s;
}

NullPair null_pair(const Mat& A, double null_gate, double bt_gate) {
    const Spectrum s = spectrum(A);
    const double gate = null_gate * A.norm();
    int small = 0;
    for (auto l : s.eigenvalues) small += std::abs(l) <= gate ? 1 : 0;
    if (small >= 2) throw AmbiguousKernel("null_pair: two eigenvalues inside the null gate");

    NullPair np;
    np.q = inverse_iteration(A, 0.0);
    orient_lexicographic(np.q);
    np.p = inverse_iteration(A.transpose(), 0.0);
    np.pq = np.p.dot(np.q);
    if (np.pq < 0) {
        np.p = -np.p;
        np.pq = -np.pq;
    }
    if (np.pq > bt_gate) {
        np.p /= np.pq;
    } else {
        np.bt_flag = true;
    }
    return np;
}

Vec real_eigenvector(const Mat& A, double lambda) {
    Vec v = inverse_iteration(A, lambda);
    orient_lexicographic(v);
    return v;
}

BorderedNull bordered_null_vectors(const Mat& J, const Vec& q_ref, const Vec& p_ref) {
    const Eigen::Index n = J.rows();
    Mat M = Mat::Zero(n + 1, n + 1);
    Vec rhs = Vec::Zero(n + 1);
    rhs[n] = 1.0;

    M.topLeftCorner(n, n) = J;
    M.topRightCorner(n, 1) = p_ref;
    M.bottomLeftCorner(1, n) = q_ref.transpose();
    Vec v = solve_linear(M, rhs).head(n);

    M.topLeftCorner(n, n) = J.transpose();
    M.topRightCorner(n, 1) = q_ref;
    M.bottomLeftCorner(1, n) = p_ref.transpose();
    Vec w = solve_linear(M, rhs).head(n);

    v.normalize();
    w.normalize();
    if (v.dot(q_ref) < 0) v = -v;
    if (w.dot(p_ref) < 0) w = -w;
    return {v, w};
}

Vec newton_solve(const ResidualFn& residual, const JacobianFn& jacobian, Vec x, const NewtonOptions& opt) {
    Vec r = residual(x);
    double rn = r.norm();
    for (int it = 0; it < opt.max_iter; ++it) {
        if (rn <= opt.tol) return x;
        const Vec step = solve_linear(jacobian(x), -r);
        double lambda = 1.0;
        Vec trial = x + step;
        Vec rt = residual(trial);
        for (int h = 0; h < opt.max_halvings && !(rt.allFinite() && rt.norm() < rn); ++h) {
            lambda *= 0.5;
            trial = x + lambda * step;
            rt = residual(trial);
        }
        if (!rt.allFinite()) break;
        x = trial;
        r = rt;
        rn = r.norm();
    }
    if (rn <= opt.tol) return x;
    throw MaxIter("newton_solve: residual " + std::to_string(rn) + " above tolerance after " +
                  std::to_string(opt.max_iter) + " iterations");
}

Vec newton_minimum_norm(const ResidualFn& residual, const JacobianFn& jacobian, Vec x, const NewtonOptions& opt) {
    Vec r = residual(x);
    double rn = r.norm();
    for (int it = 0; it < opt.max_iter; ++it) {
        if (rn <= opt.tol) return x;
        const Mat Jm = jacobian(x);
        const Vec step = Eigen::CompleteOrthogonalDecomposition<Mat>(Jm).solve(-r);
        double lambda = 1.0;
        Vec trial = x + step;
        Vec rt = residual(trial);
        for (int h = 0; h < opt.max_halvings && !(rt.allFinite() && rt.norm() < rn); ++h) {
            lambda *= 0.5;
            trial = x + lambda * step;
            rt = residual(trial);
        }
        if (!rt.allFinite()) break;
        x = trial;
        r = rt;
        rn = r.norm();
    }
    if (rn <= opt.tol) return x;
    throw MaxIter("newton_minimum_norm: residual " + std::to_string(rn) + " above tolerance");
}

Mat fd_jacobian(const ResidualFn& residual, const Vec& u, double rel_step) {
    const Vec r0 = residual(u);
    Mat J(r0.size(), u.size());
    Vec up = u, um = u;
    for (Eigen::Index j = 0; j < u.size(); ++j) {
        const double h = rel_step * (1.0 + std::abs(u[j]));
        up[j] = u[j] + h;
        um[j] = u[j] - h;
        J.col(j) = (residual(up) - residual(um)) / (2.0 * h);
        up[j] = um[j] = u[j];
    }
    return J;
}

} // namespace cusparity
