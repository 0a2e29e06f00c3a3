#include "cusparity/errors.hpp"
#include "cusparity/family.hpp"

#include <cmath>

namespace cusparity {

namespace {

Vec vec1(double v) {
    Vec r(1);
    r << v;
    return r;
}

Mat mat1(double v) {
    Mat r(1, 1);
    r << v;
    return r;
}

// x' = t2 + t1 x + h(x) with the given h and its derivatives.
FamilySpec scalar_linear(std::string name, ParamBox box, ScalarFn h, ScalarFn dh, ScalarFn d2h,
                         std::string description) {
    FamilySpec f;
    f.name = std::move(name);
    f.dim = 1;
    f.box = std::move(box);
    f.rhs = [h](const Vec& x, const Param& t) { return vec1(t[1] + t[0] * x[0] + h(x[0])); };
    f.jac_x = [dh](const Vec& x, const Param& t) { return mat1(t[0] + dh(x[0])); };
    f.jac_theta = [](const Vec& x, const Param&) {
        Mat J(1, 2);
        J << x[0], 1.0;
        return J;
    };
    f.linear_form = ParameterLinearForm{
        [](double x) { return x; }, [](double) { return 1.0; }, [](double) { return 0.0; }, h, dh, d2h};
    f.description = std::move(description);
    return f;
}

FamilySpec make_cusp1() {
    return scalar_linear(
        "cusp1", ParamBox({-1.0, -1.0}, {1.0, 1.0}, Edge::right), [](double x) { return -x * x * x; },
        [](double x) { return -3.0 * x * x; }, [](double x) { return -6.0 * x; },
        "cusp normal form x' = t2 + t1 x - x^3");
}

FamilySpec make_dualcusp1() {
    return scalar_linear(
        "dualcusp1", ParamBox({-1.0, -1.0}, {1.0, 1.0}, Edge::left), [](double x) { return x * x * x; },
        [](double x) { return 3.0 * x * x; }, [](double x) { return 6.0 * x; },
        "dual cusp x' = t2 + t1 x + x^3");
}

FamilySpec make_quintic3() {
    return scalar_linear(
        "quintic3", ParamBox({-3.0, -3.0}, {1.0, 3.0}, Edge::right),
        [](double x) { return 2.0 * x * x * x - std::pow(x, 5); },
        [](double x) { return 6.0 * x * x - 5.0 * std::pow(x, 4); },
        [](double x) { return 12.0 * x - 20.0 * x * x * x; },
        "three-cusp family x' = t2 + t1 x + 2 x^3 - x^5");
}

FamilySpec make_bt2() {
    FamilySpec f;
    f.name = "bt2";
    f.dim = 2;
    f.box = ParamBox({-1.0, -1.0}, {1.0, 1.0}, Edge::right);
    f.rhs = [](const Vec& x, const Param& b) {
        Vec v(2);
        v << x[1], b[0] + b[1] * x[0] + x[0] * x[0] + x[0] * x[1];
        return v;
    };
    f.jac_x = [](const Vec& x, const Param& b) {
        Mat J(2, 2);
        J << 0.0, 1.0, b[1] + 2.0 * x[0] + x[1], x[0];
        return J;
    };
    f.jac_theta = [](const Vec& x, const Param&) {
        Mat J(2, 2);
        J << 0.0, 0.0, 1.0, x[0];
        return J;
    };
    f.description = "Bogdanov-Takens normal form x1' = x2, x2' = b1 + b2 x1 + x1^2 + x1 x2";
    return f;
}

// Cusp dynamics in x1 with a rotation in (x2, x3) whose real part mu turns
// positive only inside a small region of the catastrophe manifold that
// crosses the fold curve at x1 = 0.2 and x1 = 0.4.
FamilySpec make_fh3() {
    struct Mu {
        static double value(double x, double t1) {
            const double a = x - 0.3, b = t1 - 3.0 * x * x;
            return 0.01 - a * a - b * b;
        }
        static double dx(double x, double t1) { return -2.0 * (x - 0.3) + 12.0 * x * (t1 - 3.0 * x * x); }
        static double dt1(double x, double t1) { return -2.0 * (t1 - 3.0 * x * x); }
    };
    FamilySpec f;
    f.name = "fh3";
    f.dim = 3;
    f.box = ParamBox({-1.0, -1.0}, {1.0, 1.0}, Edge::right);
    f.rhs = [](const Vec& x, const Param& t) {
        const double mu = Mu::value(x[0], t[0]);
        Vec v(3);
        v << t[1] + t[0] * x[0] - x[0] * x[0] * x[0], mu * x[1] - x[2], x[1] + mu * x[2];
        return v;
    };
    f.jac_x = [](const Vec& x, const Param& t) {
        const double mu = Mu::value(x[0], t[0]), mux = Mu::dx(x[0], t[0]);
        Mat J(3, 3);
        J << t[0] - 3.0 * x[0] * x[0], 0.0, 0.0, mux * x[1], mu, -1.0, mux * x[2], 1.0, mu;
        return J;
    };
    f.jac_theta = [](const Vec& x, const Param& t) {
        const double mut = Mu::dt1(x[0], t[0]);
        Mat J(3, 2);
        J << x[0], 1.0, mut * x[1], 0.0, mut * x[2], 0.0;
        return J;
    };
    f.description = "cusp with a rotating pair; fold-Hopf points at t=(0.12,-0.016) and t=(0.48,-0.128)";
    return f;
}

FamilySpec make_dwell_grad() {
    auto potential = [](const Vec& x, const Param& t) {
        const double v = x[0];
        return 0.25 * v * v * v * v - 0.5 * t[0] * v * v - t[1] * v;
    };
    auto gradient = [](const Vec& x, const Param& t) { return vec1(x[0] * x[0] * x[0] - t[0] * x[0] - t[1]); };
    auto hessian = [](const Vec& x, const Param& t) { return mat1(3.0 * x[0] * x[0] - t[0]); };
    FamilySpec f = gradient_family_from_potential("dwell_grad", 1, potential,
                                                  ParamBox({-1.0, -1.0}, {1.0, 1.0}, Edge::right), gradient,
                                                  hessian);
    f.jac_theta = [](const Vec& x, const Param&) {
        Mat J(1, 2);
        J << x[0], 1.0;
        return J;
    };
    f.linear_form = ParameterLinearForm{[](double x) { return x; },
                                        [](double) { return 1.0; },
                                        [](double) { return 0.0; },
                                        [](double x) { return -x * x * x; },
                                        [](double x) { return -3.0 * x * x; },
                                        [](double x) { return -6.0 * x; }};
    f.description = "gradient of f = x^4/4 - t1 x^2/2 - t2 x";
    return f;
}

} // namespace

std::vector<std::string> builtin_names() {
    return {"cusp1", "quintic3", "bt2", "fh3", "dualcusp1", "dwell_grad"};
}

FamilySpec builtin(std::string_view name) {
    if (name == "cusp1") return make_cusp1();
    if (name == "quintic3") return make_quintic3();
    if (name == "bt2") return make_bt2();
    if (name == "fh3") return make_fh3();
    if (name == "dualcusp1") return make_dualcusp1();
    if (name == "dwell_grad") return make_dwell_grad();
    throw UnknownFamily("unknown built-in family '" + std::string(name) + "'");
}

} // namespace cusparity
