#include "cusparity/equilibria.hpp"

#include "cusparity/detect.hpp"
#include "cusparity/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace cusparity {

namespace {

bool lex_less(const Vec& a, const Vec& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return a[i] < b[i];
    return false;
}

// Newton on M(x) F(x) with M = prod_k (1/|x - r_k|^2 + 1); known roots
// repel the iteration.
std::optional<Vec> deflated_newton(const FamilySpec& f, const Param& theta, Vec x, const std::vector<Vec>& roots,
                                   double cap) {
    for (int it = 0; it < 60; ++it) {
        Vec F;
        Mat J;
        try {
            F = eval_rhs(f, x, theta);
            J = jacobian_x(f, x, theta);
        } catch (const EvaluationError&) {
            return std::nullopt;
        }
        if (F.norm() <= 1e-9) return x;
        double M = 1.0;
        Vec grad_log = Vec::Zero(x.size());
        for (const auto& r : roots) {
            const Vec d = x - r;
            const double d2 = d.squaredNorm();
            if (d2 < 1e-24) return std::nullopt;
            const double m = 1.0 / d2 + 1.0;
            M *= m;
            grad_log += (-2.0 * d / (d2 * d2)) / m;
        }
        const Mat JG = M * (J + F * grad_log.transpose());
        Vec step;
        try {
            step = solve_linear(JG, -M * F);
        } catch (const SingularMatrix&) {
            return std::nullopt;
        }
        // Bound the step so a flat direction cannot throw the iterate away.
        const double limit = 0.5 * cap;
        if (step.norm() > limit) step *= limit / step.norm();
        x += step;
        if (!x.allFinite() || x.norm() > cap) return std::nullopt;
    }
    return std::nullopt;
}

} // namespace

double state_radius(const FamilySpec& f, const Settings& s) {
    if (s.state_radius > 0.0) return s.state_radius;
    return std::max(2.0, 0.5 * f.box.diagonal() + 1.0);
}

double state_cap(const FamilySpec& f, const Settings& s) { return s.state_cap_factor * f.box.diagonal(); }

Vec refine_equilibrium(const FamilySpec& f, const Vec& x0, const Param& theta, const Settings& s) {
    NewtonOptions opt{s.newton_tol, s.newton_maxit, 20};
    Vec x = newton_solve([&](const Vec& y) { return eval_rhs(f, y, theta); },
                         [&](const Vec& y) { return jacobian_x(f, y, theta); }, x0, opt);
    // polish past the residual tolerance while it keeps helping
    double r = eval_rhs(f, x, theta).norm();
    for (int k = 0; k < 2 && r > 0.0; ++k) {
        try {
            const Vec y = x - solve_linear(jacobian_x(f, x, theta), eval_rhs(f, x, theta));
            const double ry = eval_rhs(f, y, theta).norm();
            if (!(ry < r)) break;
            x = y;
            r = ry;
        } catch (const Error&) {
            break;
        }
    }
    return x;
}

BranchPoint classify_point(const FamilySpec& f, const Vec& x, const Param& theta, const Settings& s, double path_s) {
    BranchPoint b;
    b.x = x;
    b.theta = theta;
    b.s = path_s;
    b.spectrum = spectrum(jacobian_x(f, x, theta));
    b.stability = classify_equilibrium(b.spectrum, s.hyp_gate);
    return b;
}

std::vector<Vec> find_equilibria(const FamilySpec& f, const Param& theta, const Settings& s, std::uint64_t stream,
                                 int restarts) {
    const int starts = restarts >= 0 ? restarts : s.restarts;
    const double radius = state_radius(f, s);
    const double cap = state_cap(f, s);
    std::mt19937_64 rng(s.seed + 0x9E3779B97F4A7C15ULL * (stream + 1));
    std::uniform_real_distribution<double> unif(-radius, radius);

    std::vector<Vec> roots;
    // Each start is deflated against earlier roots, and keeps deflating
    // until it stops producing new ones.
    for (int k = 0; k < starts; ++k) {
        Vec x0(f.dim);
        for (int i = 0; i < f.dim; ++i) x0[i] = k == 0 ? 0.0 : unif(rng);
        for (int found = 0; found <= 8; ++found) {
            auto raw = deflated_newton(f, theta, x0, roots, cap);
            if (!raw) break;
            Vec root;
            try {
                root = refine_equilibrium(f, *raw, theta, s);
            } catch (const Error&) {
                break;
            }
            if (root.norm() > cap) break;
            const bool known = std::any_of(roots.begin(), roots.end(), [&](const Vec& r) {
                return (r - root).norm() <= 1e-7 * (1.0 + root.norm());
            });
            if (known) break;
            roots.push_back(root);
        }
    }
    std::sort(roots.begin(), roots.end(), lex_less);
    return roots;
}

std::vector<BranchPoint> equilibria_at(const FamilySpec& f, const Param& theta, const Settings& s,
                                       std::uint64_t stream, int restarts) {
    std::vector<BranchPoint> out;
    for (const auto& x : find_equilibria(f, theta, s, stream, restarts)) {
        try {
            out.push_back(classify_point(f, x, theta, s));
        } catch (const NoConvergence&) {
        }
    }
    return out;
}

} // namespace cusparity
