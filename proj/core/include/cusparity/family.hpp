#pragma once

#include "cusparity/expression.hpp"
#include "cusparity/linalg.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cusparity {

enum class Edge { left, right, bottom, top };

std::string_view to_string(Edge e);
Edge edge_from_string(std::string_view s);

/// Rectangular parameter domain. `sz_edge` names the edge that carries
/// the S/Z branch; it is configuration, never detected.
struct ParamBox {
    Param lo{-1.0, -1.0};
    Param hi{1.0, 1.0};
    Edge sz_edge = Edge::right;

    ParamBox() = default;
    ParamBox(Param lo_, Param hi_, Edge sz = Edge::right);

    Param width() const { return hi - lo; }
    double diagonal() const { return width().norm(); }
    bool contains(const Param& theta, double tol = 0.0) const;
    /// Maps the box onto the unit square.
    Param to_unit(const Param& theta) const;

    /// Endpoints of an edge, oriented counter-clockwise around the box.
    std::array<Param, 2> edge_segment(Edge e) const;
    /// The four edges in counter-clockwise order starting at `sz_edge`.
    std::array<Edge, 4> edges_from_sz() const;

    bool operator==(const ParamBox&) const = default;
};

enum class FamilyKind { general, gradient };

using RhsFn = std::function<Vec(const Vec&, const Param&)>;
using MatFn = std::function<Mat(const Vec&, const Param&)>;
using PotentialFn = std::function<double(const Vec&, const Param&)>;
using ScalarFn = std::function<double(double)>;

/// Closed-form pieces of a scalar family x' = t2 + t1 g(x) + h(x).
struct ParameterLinearForm {
    ScalarFn g, dg, d2g;
    ScalarFn h, dh, d2h;
};

/// A two-parameter family of vector fields over a parameter box.
///
/// Families are pure evaluators. Missing analytic Jacobians fall back to
/// central differences with step fd_step * (1 + |x|).
struct FamilySpec {
    std::string name;
    int dim = 1;
    ParamBox box;
    RhsFn rhs;
    MatFn jac_x;      // optional n x n
    MatFn jac_theta;  // optional n x 2
    double fd_step = 1e-5;
    FamilyKind kind = FamilyKind::general;
    PotentialFn potential;  // set when kind == gradient
    std::optional<ParameterLinearForm> linear_form;
    std::string description;
};

Vec eval_rhs(const FamilySpec& f, const Vec& x, const Param& theta);

Mat jacobian_x(const FamilySpec& f, const Vec& x, const Param& theta);
/// Always central differences, ignoring any analytic Jacobian.
Mat jacobian_x_fd(const FamilySpec& f, const Vec& x, const Param& theta);
Mat jacobian_theta(const FamilySpec& f, const Vec& x, const Param& theta);

/// Second directional derivative D^2X(x)[q1, q2].
Vec directional_B(const FamilySpec& f, const Vec& x, const Param& theta, const Vec& q1, const Vec& q2);
/// Third directional derivative D^3X(x)[q1, q2, q3].
Vec directional_C(const FamilySpec& f, const Vec& x, const Param& theta, const Vec& q1, const Vec& q2,
                  const Vec& q3);

/// Builds x' = -grad f(x, theta). Gradient and Hessian default to finite
/// differences of the potential.
FamilySpec gradient_family_from_potential(std::string name, int dim, PotentialFn potential, ParamBox box,
                                          RhsFn gradient = {}, MatFn hessian = {}, double fd_step = 1e-5);

/// Families built from expression strings, one per state component.
FamilySpec family_from_expressions(std::string name, const std::vector<Expression>& rhs, ParamBox box,
                                   double fd_step = 1e-5);
FamilySpec gradient_family_from_expression(std::string name, const Expression& potential, ParamBox box,
                                           double fd_step = 1e-5);

/// Extracts g and h when a scalar expression has the form t2 + t1 g(x) + h(x).
std::optional<ParameterLinearForm> parameter_linear_form(const Expression& rhs);

/// Built-in families: cusp1, quintic3, bt2, fh3, dualcusp1, dwell_grad.
FamilySpec builtin(std::string_view name);
std::vector<std::string> builtin_names();

} // namespace cusparity
