#include "palc.hpp"

#include "cusparity/errors.hpp"

namespace cusparity::detail {

Mat ArcSystem::jacobian(const Vec& u) const { return fd_jacobian(residual, u, 1e-7); }

Vec ArcSystem::tangent(const Vec& u, const Vec& ref) const {
    const Mat A = jacobian(u) * scale.asDiagonal();
    const Eigen::Index N = A.cols();
    Mat M(N, N);
    M.topRows(N - 1) = A;
    M.row(N - 1) = ref.transpose();
    Vec e = Vec::Zero(N);
    e[N - 1] = 1.0;
    Vec t;
    try {
        t = solve_linear(M, e);
    } catch (const SingularMatrix&) {
        auto alt = initial_tangent(u);
        if (!alt) throw;
        t = *alt;
    }
    t.normalize();
    if (t.dot(ref) < 0) t = -t;
    return t;
}

std::optional<Vec> ArcSystem::initial_tangent(const Vec& u) const {
    const Mat A = jacobian(u) * scale.asDiagonal();
    Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullV);
    const Vec sv = svd.singularValues();
    if (sv.size() == 0 || sv[sv.size() - 1] < 1e-8 * std::max(1.0, sv[0])) return std::nullopt;
    return Vec(svd.matrixV().col(A.cols() - 1));
}

std::optional<Corrected> correct(const ArcSystem& sys, const Vec& u_prev, const Vec& tangent, double h, double tol,
                                 int maxit) {
    const Eigen::Index N = u_prev.size();
    Vec u = u_prev + h * tangent.cwiseProduct(sys.scale);
    const Vec row = tangent.cwiseQuotient(sys.scale);
    for (int it = 0; it <= maxit; ++it) {
        Vec r(N);
        r.head(N - 1) = sys.residual(u);
        r[N - 1] = row.dot(u - u_prev) - h;
        if (!r.allFinite()) return std::nullopt;
        if (r.norm() <= tol) return Corrected{u, it};
        if (it == maxit) break;
        Mat J(N, N);
        J.topRows(N - 1) = sys.jacobian(u);
        J.row(N - 1) = row.transpose();
        try {
            u += solve_linear(J, -r);
        } catch (const SingularMatrix&) {
            return std::nullopt;
        }
        if (sys.distance(u, u_prev) > 2.0 * h + 1e-12) return std::nullopt;
    }
    return std::nullopt;
}

std::optional<Vec> solve_augmented(const ResidualFn& residual, const std::function<double(const Vec&)>& extra,
                                   Vec u, double tol, int maxit) {
    auto full = [&](const Vec& v) {
        const Vec r = residual(v);
        Vec out(r.size() + 1);
        out.head(r.size()) = r;
        out[r.size()] = extra(v);
        return out;
    };
    for (int it = 0; it <= maxit; ++it) {
        const Vec r = full(u);
        if (!r.allFinite()) return std::nullopt;
        if (r.norm() <= tol) return u;
        if (it == maxit) break;
        try {
            u += solve_linear(fd_jacobian(full, u, 1e-7), -r);
        } catch (const SingularMatrix&) {
            return std::nullopt;
        }
    }
    return std::nullopt;
}

} // namespace cusparity::detail
