#include "cusparity/family.hpp"

#include "cusparity/errors.hpp"

#include <cmath>
#include <sstream>

namespace cusparity {

std::string_view to_string(Edge e) {
    switch (e) {
    case Edge::left: return "left";
    case Edge::right: return "right";
    case Edge::bottom: return "bottom";
    case Edge::top: return "top";
    }
    return "?";
}

Edge edge_from_string(std::string_view s) {
    if (s == "left") return Edge::left;
    if (s == "right") return Edge::right;
    if (s == "bottom") return Edge::bottom;
    if (s == "top") return Edge::top;
    throw ParseError("unknown edge '" + std::string(s) + "' (expected left, right, bottom or top)");
}

ParamBox::ParamBox(Param lo_, Param hi_, Edge sz) : lo(std::move(lo_)), hi(std::move(hi_)), sz_edge(sz) {
    if (!(lo.x() < hi.x() && lo.y() < hi.y()))
        throw ParseError("parameter box requires lo < hi componentwise");
}

bool ParamBox::contains(const Param& theta, double tol) const {
    return theta.x() >= lo.x() - tol && theta.x() <= hi.x() + tol && theta.y() >= lo.y() - tol &&
           theta.y() <= hi.y() + tol;
}

Param ParamBox::to_unit(const Param& theta) const { return (theta - lo).cwiseQuotient(width()); }

std::array<Param, 2> ParamBox::edge_segment(Edge e) const {
    switch (e) {
    case Edge::bottom: return {Param(lo.x(), lo.y()), Param(hi.x(), lo.y())};
    case Edge::right: return {Param(hi.x(), lo.y()), Param(hi.x(), hi.y())};
    case Edge::top: return {Param(hi.x(), hi.y()), Param(lo.x(), hi.y())};
    case Edge::left: return {Param(lo.x(), hi.y()), Param(lo.x(), lo.y())};
    }
    return {lo, hi};
}

std::array<Edge, 4> ParamBox::edges_from_sz() const {
    constexpr std::array<Edge, 4> ccw{Edge::bottom, Edge::right, Edge::top, Edge::left};
    std::size_t k = 0;
    while (ccw[k] != sz_edge) ++k;
    return {ccw[k], ccw[(k + 1) % 4], ccw[(k + 2) % 4], ccw[(k + 3) % 4]};
}

namespace {

std::string describe_point(const Vec& x, const Param& theta) {
    std::ostringstream os;
    os.precision(17);
    os << "x=(";
    for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
    os << ") theta=(" << theta.x() << "," << theta.y() << ")";
    return os.str();
}

double step_for(const FamilySpec& f, double v) { return f.fd_step * (1.0 + std::abs(v)); }

} // namespace

Vec eval_rhs(const FamilySpec& f, const Vec& x, const Param& theta) {
    Vec v = f.rhs(x, theta);
    if (v.size() != f.dim || !v.allFinite())
        throw EvaluationError("non-finite or mis-sized field value at " + describe_point(x, theta));
    return v;
}

Mat jacobian_x_fd(const FamilySpec& f, const Vec& x, const Param& theta) {
    Mat J(f.dim, f.dim);
    Vec xp = x, xm = x;
    for (int j = 0; j < f.dim; ++j) {
        const double h = step_for(f, x[j]);
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        J.col(j) = (eval_rhs(f, xp, theta) - eval_rhs(f, xm, theta)) / (2.0 * h);
        xp[j] = xm[j] = x[j];
    }
    return J;
}

Mat jacobian_x(const FamilySpec& f, const Vec& x, const Param& theta) {
    if (!f.jac_x) return jacobian_x_fd(f, x, theta);
    Mat J = f.jac_x(x, theta);
    if (J.rows() != f.dim || J.cols() != f.dim || !J.allFinite())
        throw EvaluationError("non-finite Jacobian at " + describe_point(x, theta));
    return J;
}

Mat jacobian_theta(const FamilySpec& f, const Vec& x, const Param& theta) {
    if (f.jac_theta) {
        Mat J = f.jac_theta(x, theta);
        if (J.rows() != f.dim || J.cols() != 2 || !J.allFinite())
            throw EvaluationError("non-finite parameter Jacobian at " + describe_point(x, theta));
        return J;
    }
    Mat J(f.dim, 2);
    for (int k = 0; k < 2; ++k) {
        const double h = step_for(f, theta[k]);
        Param tp = theta, tm = theta;
        tp[k] += h;
        tm[k] -= h;
        J.col(k) = (eval_rhs(f, x, tp) - eval_rhs(f, x, tm)) / (2.0 * h);
    }
    return J;
}

Vec directional_B(const FamilySpec& f, const Vec& x, const Param& theta, const Vec& q1, const Vec& q2) {
    if (f.jac_x) {
        const double h = f.fd_step * (1.0 + x.norm());
        return (jacobian_x(f, x + h * q2, theta) - jacobian_x(f, x - h * q2, theta)) * q1 / (2.0 * h);
    }
    // Second difference of the field itself; a difference of difference
    // Jacobians would lose half the digits.
    const double h = 10.0 * f.fd_step * (1.0 + x.norm());
    const Vec s = q1 + q2, d = q1 - q2;
    return (eval_rhs(f, x + h * s, theta) - eval_rhs(f, x + h * d, theta) - eval_rhs(f, x - h * d, theta) +
            eval_rhs(f, x - h * s, theta)) /
           (4.0 * h * h);
}

namespace {

// C(v, v, v) from the field by a centred third difference.
Vec cubic_form(const FamilySpec& f, const Vec& x, const Param& theta, const Vec& v, double h) {
    return (eval_rhs(f, x + 2.0 * h * v, theta) - 2.0 * eval_rhs(f, x + h * v, theta) +
            2.0 * eval_rhs(f, x - h * v, theta) - eval_rhs(f, x - 2.0 * h * v, theta)) /
           (2.0 * h * h * h);
}

} // namespace

Vec directional_C(const FamilySpec& f, const Vec& x, const Param& theta, const Vec& q1, const Vec& q2,
                  const Vec& q3) {
    if (f.jac_x) {
        const double h = 10.0 * f.fd_step * (1.0 + x.norm());
        const Vec s = q2 + q3, d = q2 - q3;
        const Mat D2 = jacobian_x(f, x + h * s, theta) - jacobian_x(f, x + h * d, theta) -
                       jacobian_x(f, x - h * d, theta) + jacobian_x(f, x - h * s, theta);
        return D2 * q1 / (4.0 * h * h);
    }
    // Polarisation: C(a,b,c) = 1/24 sum_{s,t=+-1} s t T(a + s b + t c).
    const double h = 100.0 * f.fd_step * (1.0 + x.norm());
    Vec acc = Vec::Zero(f.dim);
    for (int s : {-1, 1})
        for (int t : {-1, 1}) acc += double(s * t) * cubic_form(f, x, theta, q1 + s * q2 + t * q3, h);
    return acc / 24.0;
}

FamilySpec gradient_family_from_potential(std::string name, int dim, PotentialFn potential, ParamBox box,
                                          RhsFn gradient, MatFn hessian, double fd_step) {
    FamilySpec fam;
    fam.name = std::move(name);
    fam.dim = dim;
    fam.box = std::move(box);
    fam.kind = FamilyKind::gradient;
    fam.fd_step = fd_step;
    fam.potential = potential;
    if (gradient) {
        fam.rhs = [gradient](const Vec& x, const Param& th) -> Vec { return -gradient(x, th); };
    } else {
        fam.rhs = [potential, fd_step](const Vec& x, const Param& th) -> Vec {
            Vec g(x.size());
            Vec xp = x, xm = x;
            for (Eigen::Index i = 0; i < x.size(); ++i) {
                const double h = fd_step * (1.0 + std::abs(x[i]));
                xp[i] = x[i] + h;
                xm[i] = x[i] - h;
                g[i] = (potential(xp, th) - potential(xm, th)) / (2.0 * h);
                xp[i] = xm[i] = x[i];
            }
            return -g;
        };
    }
    if (hessian) {
        fam.jac_x = [hessian](const Vec& x, const Param& th) -> Mat { return -hessian(x, th); };
    } else if (!gradient) {
        fam.jac_x = [potential, fd_step](const Vec& x, const Param& th) -> Mat {
            const Eigen::Index n = x.size();
            Mat H(n, n);
            const double f0 = potential(x, th);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double hi = 10.0 * fd_step * (1.0 + std::abs(x[i]));
                for (Eigen::Index j = i; j < n; ++j) {
                    const double hj = 10.0 * fd_step * (1.0 + std::abs(x[j]));
                    double v;
                    if (i == j) {
                        Vec xp = x, xm = x;
                        xp[i] += hi;
                        xm[i] -= hi;
                        v = (potential(xp, th) - 2.0 * f0 + potential(xm, th)) / (hi * hi);
                    } else {
                        Vec a = x, b = x, c = x, d = x;
                        a[i] += hi, a[j] += hj;
                        b[i] += hi, b[j] -= hj;
                        c[i] -= hi, c[j] += hj;
                        d[i] -= hi, d[j] -= hj;
                        v = (potential(a, th) - potential(b, th) - potential(c, th) + potential(d, th)) /
                            (4.0 * hi * hj);
                    }
                    H(i, j) = H(j, i) = v;
                }
            }
            return -H;
        };
    }
    return fam;
}

namespace {

std::vector<double> slots_of(const Vec& x, const Param& theta) {
    std::vector<double> s(static_cast<std::size_t>(x.size()) + 2);
    for (Eigen::Index i = 0; i < x.size(); ++i) s[static_cast<std::size_t>(i)] = x[i];
    s[static_cast<std::size_t>(x.size())] = theta.x();
    s[static_cast<std::size_t>(x.size()) + 1] = theta.y();
    return s;
}

} // namespace

FamilySpec family_from_expressions(std::string name, const std::vector<Expression>& rhs, ParamBox box,
                                   double fd_step) {
    const int n = static_cast<int>(rhs.size());
    if (n < 1) throw ParseError("family needs at least one right-hand side");
    std::vector<Expression> dx, dtheta;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) dx.push_back(rhs[static_cast<std::size_t>(i)].derivative(j));
        for (int k = 0; k < 2; ++k) dtheta.push_back(rhs[static_cast<std::size_t>(i)].derivative(n + k));
    }
    FamilySpec fam;
    fam.name = std::move(name);
    fam.dim = n;
    fam.box = std::move(box);
    fam.fd_step = fd_step;
    fam.rhs = [rhs, n](const Vec& x, const Param& th) -> Vec {
        const auto s = slots_of(x, th);
        Vec v(n);
        for (int i = 0; i < n; ++i) v[i] = rhs[static_cast<std::size_t>(i)].evaluate(s);
        return v;
    };
    fam.jac_x = [dx, n](const Vec& x, const Param& th) -> Mat {
        const auto s = slots_of(x, th);
        Mat J(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) J(i, j) = dx[static_cast<std::size_t>(i * n + j)].evaluate(s);
        return J;
    };
    fam.jac_theta = [dtheta, n](const Vec& x, const Param& th) -> Mat {
        const auto s = slots_of(x, th);
        Mat J(n, 2);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < 2; ++k) J(i, k) = dtheta[static_cast<std::size_t>(i * 2 + k)].evaluate(s);
        return J;
    };
    if (n == 1) fam.linear_form = parameter_linear_form(rhs.front());
    return fam;
}

FamilySpec gradient_family_from_expression(std::string name, const Expression& potential, ParamBox box,
                                           double fd_step) {
    const int n = potential.dim();
    std::vector<Expression> rhs;
    for (int i = 0; i < n; ++i) rhs.push_back(potential.derivative(i).negated());
    FamilySpec fam = family_from_expressions(std::move(name), rhs, std::move(box), fd_step);
    fam.kind = FamilyKind::gradient;
    fam.potential = [potential](const Vec& x, const Param& th) { return potential.evaluate(slots_of(x, th)); };
    return fam;
}

std::optional<ParameterLinearForm> parameter_linear_form(const Expression& rhs) {
    if (rhs.dim() != 1) return std::nullopt;
    const Expression d_t2 = rhs.derivative(2);
    const Expression g = rhs.derivative(1);
    if (g.depends_on(1) || g.depends_on(2) || d_t2.depends_on(0) || d_t2.depends_on(1) || d_t2.depends_on(2))
        return std::nullopt;
    const std::array<double, 3> probe{0.0, 0.0, 0.0};
    if (std::abs(d_t2.evaluate(probe) - 1.0) > 1e-14) return std::nullopt;
    const Expression h = rhs.substitute(1, 0.0).substitute(2, 0.0);
    const Expression dg = g.derivative(0), d2g = dg.derivative(0);
    const Expression dh = h.derivative(0), d2h = dh.derivative(0);
    auto wrap = [](Expression e) -> ScalarFn {
        return [e](double x) {
            const std::array<double, 3> s{x, 0.0, 0.0};
            return e.evaluate(s);
        };
    };
    return ParameterLinearForm{wrap(g), wrap(dg), wrap(d2g), wrap(h), wrap(dh), wrap(d2h)};
}

} // namespace cusparity
