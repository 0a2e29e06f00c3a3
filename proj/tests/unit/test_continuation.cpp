#include "doctest.h"
#include "oracles.hpp"

#include "cusparity/continuation.hpp"
#include "cusparity/detect.hpp"
#include "cusparity/equilibria.hpp"
#include "cusparity/errors.hpp"

#include <cmath>

using namespace cusparity;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

const double kFoldTheta2 = 2.0 / (3.0 * std::sqrt(3.0));

FoldPoint cusp1_right_fold(const FamilySpec& f, const Settings& s) {
    return refine_fold_seed(f, v1(1 / std::sqrt(3.0)), v1(1.0), {1.0, -kFoldTheta2}, s);
}

Codim2Point normal_form_cusp() {
    Codim2Point c;
    c.kind = Codim2Kind::cusp_standard;
    c.x = v1(0.0);
    c.q = v1(1.0);
    c.theta = {0.0, 0.0};
    c.frame = Mat2::Identity();
    return c;
}

double discriminant(const Param& t) { return 4 * t[0] * t[0] * t[0] - 27 * t[1] * t[1]; }

// fold set of x' = t2 + t1 x - x^3 as seen by the parameter-linear oracle
Param cusp1_fold_of(double x) {
    const auto p = oracle::linear_fold(x, [](double y) { return -y * y * y; }, [](double y) { return -3 * y * y; });
    return {p.t1, p.t2};
}

Param quintic_fold_of(double x) {
    const auto p = oracle::linear_fold(
        x, [](double y) { return 2 * y * y * y - std::pow(y, 5); },
        [](double y) { return 6 * y * y - 5 * std::pow(y, 4); });
    return {p.t1, p.t2};
}

void check_fold_invariants(const FamilySpec& f, const FoldCurveRecord& c, const Settings& s) {
    for (std::size_t i = 0; i < c.points.size(); ++i) {
        const auto& p = c.points[i];
        CHECK(eval_rhs(f, p.x, p.theta).norm() <= 1e-8);
        CHECK((jacobian_x(f, p.x, p.theta) * p.nullpair.q).norm() <= 1e-8);
        if (i > 0) {
            CHECK(p.nullpair.q.dot(c.points[i - 1].nullpair.q) > s.transport_gate);
            const Param d = f.box.to_unit(p.theta) - f.box.to_unit(c.points[i - 1].theta);
            CHECK(d.norm() <= s.h_max * (1 + 1e-9));
        }
    }
}

} // namespace

TEST_CASE("fold residual vanishes at folds, cusps and BT points") {
    const auto c = builtin("cusp1");
    const double x = 1 / std::sqrt(3.0);
    CHECK(fold_residual(c, v1(x), v1(1.0), {1.0, -kFoldTheta2}).norm() < 1e-12);
    CHECK(fold_residual(c, v1(0.0), v1(1.0), {0.0, 0.0}).norm() < 1e-15);
    CHECK(fold_residual(builtin("bt2"), v2(0, 0), v2(1, 0), {0.0, 0.0}).norm() < 1e-15);
    CHECK(fold_residual(c, v1(0.5), v1(1.0), {0.0, 0.0}).norm() > 0.1);

    const Vec u = pack_fold(v2(1, 2), v2(3, 4), {5, 6});
    CHECK(u.size() == 6);
    CHECK(fold_state(u, 2) == v2(1, 2));
    CHECK(fold_direction(u, 2) == v2(3, 4));
    CHECK(fold_parameters(u, 2) == Param(5, 6));
}

TEST_CASE("parameter paths use box-scaled arclength") {
    const ParamBox box({-1, -2}, {1, 2});
    const ParamPath path({{-1, -2}, {1, -2}, {1, 2}}, box);
    CHECK(path.length() == doctest::Approx(2.0));
    CHECK((path.at(0.5) - Param(0, -2)).norm() < 1e-15);
    CHECK((path.at(1.5) - Param(1, 0)).norm() < 1e-15);
    CHECK_FALSE(path.closed());
    CHECK(ParamPath({{0, 0}, {1, 0}, {1, 1}, {0, 0}}, box).closed());
}

TEST_CASE("cusp1 right edge carries an S-shaped branch with two folds") {
    const auto f = builtin("cusp1");
    const Settings s;
    const ParamPath path({{1, -1}, {1, 1}}, f.box);
    const double root = oracle::bisect([](double x) { return x * x * x - x + 1; }, -2, -1);
    const auto b = continue_equilibria_along_path(f, path, v1(root), s);
    REQUIRE(b.folds.size() == 2);
    // lower sheet turns back at x = -1/sqrt3, middle sheet at x = +1/sqrt3
    CHECK(b.folds[0].fold.theta[1] == doctest::Approx(kFoldTheta2).epsilon(1e-8));
    CHECK(b.folds[1].fold.theta[1] == doctest::Approx(-kFoldTheta2).epsilon(1e-8));
    CHECK(b.folds[0].fold.x[0] == doctest::Approx(-1 / std::sqrt(3.0)).epsilon(1e-8));
    CHECK(b.folds[1].fold.x[0] == doctest::Approx(1 / std::sqrt(3.0)).epsilon(1e-8));
    CHECK(b.hopfs.empty());
    CHECK(b.points.back().theta[1] == doctest::Approx(1.0));
    const double top = oracle::bisect([](double x) { return x * x * x - x - 1; }, 1, 2);
    CHECK(b.points.back().x[0] == doctest::Approx(top).epsilon(1e-9));
    for (const auto& p : b.points) CHECK(eval_rhs(f, p.x, p.theta).norm() < 1e-8);
}

TEST_CASE("cusp1 left edge branch is monotone") {
    const auto f = builtin("cusp1");
    const ParamPath path({{-1, -1}, {-1, 1}}, f.box);
    const double root = oracle::bisect([](double x) { return x * x * x + x + 1; }, -2, 0);
    const auto b = continue_equilibria_along_path(f, path, v1(root), Settings());
    CHECK(b.folds.empty());
    CHECK(b.points.back().theta[1] == doctest::Approx(1.0));
    for (const auto& p : b.points) CHECK(p.stability.kind == Stability::attractor);
}

TEST_CASE("linear family branch follows x = t2") {
    const auto f = family_from_expressions("lin", {Expression::parse("-x1 + t2", 1)}, ParamBox());
    const ParamPath path({{-0.5, -1}, {0.5, 1}}, f.box);
    const auto b = trace_branch(f, path, v1(0.0), path.length() / 2, Settings());
    CHECK(b.folds.empty());
    CHECK(b.points.front().theta[1] == doctest::Approx(-1.0));
    CHECK(b.points.back().theta[1] == doctest::Approx(1.0));
    for (const auto& p : b.points) CHECK(std::abs(p.x[0] - p.theta[1]) < 1e-10);
}

TEST_CASE("fold seeds converge from a rough guess") {
    ParamBox wide({0, -3}, {4, 0});
    const auto f = family_from_expressions("wide_cusp", {Expression::parse("t2 + t1*x1 - x1^3", 1)}, wide);
    const auto p = refine_fold_seed(f, v1(1.05), v1(1.0), {2.9, -2.1}, Settings());
    CHECK(p.theta[0] == doctest::Approx(3 * p.x[0] * p.x[0]).epsilon(1e-10));
    CHECK(p.theta[1] == doctest::Approx(-2 * std::pow(p.x[0], 3)).epsilon(1e-10));
    CHECK(p.x[0] == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("cusp1 fold curve matches the discriminant") {
    const auto f = builtin("cusp1");
    const Settings s;
    const auto c = continue_fold_curve(f, cusp1_right_fold(f, s), s);
    CHECK_FALSE(c.closed);
    REQUIRE(c.start_edge);
    REQUIRE(c.end_edge);
    CHECK(*c.start_edge == Edge::right);
    CHECK(*c.end_edge == Edge::right);
    double sq = 0.0;
    for (const auto& p : c.points) {
        sq += (p.theta - cusp1_fold_of(p.x[0])).squaredNorm();
        CHECK(std::abs(discriminant(p.theta)) < 1e-9);
    }
    CHECK(std::sqrt(sq / c.points.size()) < 1e-6);
    REQUIRE(c.cusp_count() == 1);
    CHECK(c.codim2_points[0].theta.norm() < 1e-6);
    CHECK(c.codim2_points[0].kind == Codim2Kind::cusp_standard);
    CHECK(std::abs(c.points.front().theta[0] - 1) < s.edge_tol);
    CHECK(std::abs(c.points.back().theta[0] - 1) < s.edge_tol);
    check_fold_invariants(f, c, s);
}

TEST_CASE("quintic3 fold curve carries three cusps") {
    const auto f = builtin("quintic3");
    const Settings s;
    const auto curves = enumerate_fold_curves(f, s);
    REQUIRE(curves.size() == 1);
    const auto& c = curves[0];
    CHECK_FALSE(c.closed);
    REQUIRE(c.cusp_count() == 3);
    const double xc = std::sqrt(0.6);
    for (const auto& m : c.codim2_points) {
        const double x = m.x[0];
        const bool centre = std::abs(x) < 0.1;
        const Param expect = quintic_fold_of(centre ? 0.0 : (x > 0 ? xc : -xc));
        CHECK((m.theta - expect).norm() < 1e-6);
        CHECK(m.kind == (centre ? Codim2Kind::cusp_dual : Codim2Kind::cusp_standard));
    }
    for (const auto& p : c.points) CHECK((p.theta - quintic_fold_of(p.x[0])).norm() < 1e-8);
    check_fold_invariants(f, c, s);
}

TEST_CASE("bt2 fold curve passes the BT point") {
    const auto f = builtin("bt2");
    const Settings s;
    // fold set: x2 = 0, x1 = -b2/2, b1 = b2^2/4
    const auto seed = refine_fold_seed(f, v2(-0.3, 0.0), v2(1.0, 0.0), {0.09, 0.6}, s);
    const auto c = continue_fold_curve(f, seed, s);
    CHECK(c.cusp_count() == 0);
    REQUIRE(c.count(Codim2Kind::bogdanov_takens) == 1);
    for (const auto& m : c.codim2_points)
        if (m.kind == Codim2Kind::bogdanov_takens) CHECK(m.theta.norm() < 1e-6);
    for (const auto& p : c.points) {
        CHECK(p.theta[0] == doctest::Approx(p.theta[1] * p.theta[1] / 4).epsilon(1e-9));
        CHECK(p.x[0] == doctest::Approx(-p.theta[1] / 2).epsilon(1e-9));
    }
}

TEST_CASE("enumeration counts") {
    const Settings s;
    CHECK(enumerate_fold_curves(builtin("cusp1"), s).size() == 1);
    auto f = builtin("cusp1");
    f.box = ParamBox({-1, -1}, {-0.5, 1});
    EnumerationLog log;
    CHECK(enumerate_fold_curves(f, s, &log).empty());
}

TEST_CASE("enumeration is stable under grid refinement") {
    for (const char* name : {"cusp1", "quintic3"}) {
        const auto f = builtin(name);
        Settings coarse, fine;
        fine.grid = 2 * coarse.grid;
        auto a = enumerate_fold_curves(f, coarse);
        auto b = enumerate_fold_curves(f, fine);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            const auto da = densify(f, a[i], 0.002, coarse);
            const auto db = densify(f, b[i], 0.002, coarse);
            INFO(name);
            CHECK(hausdorff_distance(da.parameters(), db.parameters(), f.box) < coarse.dedup_tol);
            CHECK(a[i].cusp_count() == b[i].cusp_count());
        }
    }
}

TEST_CASE("densify inserts corrected fold points") {
    const auto f = builtin("cusp1");
    const Settings s;
    const auto c = continue_fold_curve(f, cusp1_right_fold(f, s), s);
    const auto d = densify(f, c, 0.005, s);
    CHECK(d.points.size() > c.points.size());
    for (std::size_t i = 0; i < d.points.size(); ++i) {
        CHECK(std::abs(discriminant(d.points[i].theta)) < 1e-9);
        if (i > 0) {
            const Param dt = f.box.to_unit(d.points[i].theta) - f.box.to_unit(d.points[i - 1].theta);
            const double dx = d.points[i].x[0] - d.points[i - 1].x[0];
            CHECK(std::hypot(dt.norm(), dx) <= 0.005 * (1 + 1e-9));
        }
    }
}

TEST_CASE("approximating curves around the normal-form cusp") {
    const auto cusp = normal_form_cusp();
    const auto zero = approximating_curve(cusp, 0.0, 0.3);
    for (const auto& t : zero) CHECK(std::abs(discriminant(t)) < 1e-12);

    // nudging: strictly inside the cusp region
    const auto nudge = approximating_curve(cusp, -0.01, 0.3);
    for (const auto& t : nudge) {
        CHECK(t[0] > 0);
        CHECK(discriminant(t) > 0);
    }
    const auto closed_nudge = closed_approximating_curve(cusp, -0.01, 0.3);
    CHECK((closed_nudge.front() - closed_nudge.back()).norm() < 1e-15);
    for (const auto& t : closed_nudge) CHECK(discriminant(t) > 0);

    // looping: the closed part winds once around the cusp point
    const auto loop = closed_approximating_curve(cusp, 0.01, 0.3);
    CHECK((loop.front() - loop.back()).norm() < 1e-12);
    double winding = 0.0;
    for (std::size_t i = 1; i < loop.size(); ++i) {
        const double a0 = std::atan2(loop[i - 1][1], loop[i - 1][0]);
        const double a1 = std::atan2(loop[i][1], loop[i][0]);
        double d = a1 - a0;
        if (d > M_PI) d -= 2 * M_PI;
        if (d < -M_PI) d += 2 * M_PI;
        winding += d;
    }
    CHECK(std::abs(std::abs(winding) - 2 * M_PI) < 1e-6);
}

TEST_CASE("lifts of approximating curves") {
    const auto f = builtin("cusp1");
    const Settings s;
    const auto cusp = normal_form_cusp();

    const auto nudge = closed_approximating_curve(cusp, -0.01, 0.1);
    const auto ln = lift_curve(f, nudge, approximating_curve_seed(cusp, -0.01, 0.1), s);
    CHECK(ln.closed_base);
    CHECK(ln.simple);
    for (std::size_t i = 0; i < ln.fiber.size(); ++i) {
        CHECK(ln.stability[i].is_saddle(1));
        CHECK(eval_rhs(f, ln.fiber[i], ln.base[i]).norm() <= 1e-8);
    }

    const auto loop = closed_approximating_curve(cusp, 0.01, 0.3);
    const auto ll = lift_curve(f, loop, approximating_curve_seed(cusp, 0.01, 0.3), s);
    CHECK(ll.closed_base);
    for (std::size_t i = 0; i < ll.fiber.size(); ++i) {
        CHECK(ll.stability[i].kind == Stability::attractor);
        CHECK(eval_rhs(f, ll.fiber[i], ll.base[i]).norm() <= 1e-8);
    }

    const ParamPolyline still{{0.3, 0.1}, {0.3, 0.1}, {0.3, 0.1}};
    const Vec x0 = refine_equilibrium(f, v1(0.6), still[0], s);
    const auto lc = lift_curve(f, still, x0, s);
    for (const auto& x : lc.fiber) CHECK((x - x0).norm() < 1e-14);
}

TEST_CASE("lifting across a fold is refused") {
    const auto f = builtin("cusp1");
    const Settings s;
    const ParamPolyline across{{1, 0.9}, {1, -0.9}};
    const double root = oracle::bisect([](double x) { return x * x * x - x - 0.9; }, 1, 2);
    CHECK_THROWS_AS(lift_curve(f, across, v1(root), s), FoldOnPath);
}

TEST_CASE("hausdorff distance between polylines") {
    const ParamBox box;  // width 2: unit coordinates halve distances
    const ParamPolyline a{{-1, 0}, {1, 0}};
    const ParamPolyline b{{-1, 0.2}, {1, 0.2}};
    CHECK(hausdorff_distance(a, b, box) == doctest::Approx(0.1));
    CHECK(hausdorff_distance(a, a, box) == 0.0);
    const ParamPolyline c{{0, 0}, {1, 0}};
    CHECK(hausdorff_distance(a, c, box) == doctest::Approx(0.5));
    CHECK(point_polyline_distance({0, 0.4}, a, box) == doctest::Approx(0.2));
}

TEST_CASE("property: multi-start equilibria agree with the cubic's real roots") {
    const auto f = builtin("cusp1");
    const Settings s;
    oracle::Rng rng(21);
    for (int i = 0; i < 60; ++i) {
        const Param t{rng.uniform(-1, 1), rng.uniform(-1, 1)};
        auto roots = oracle::scan_roots([&](double x) { return t[1] + t[0] * x - x * x * x; }, -3, 3);
        const auto eq = find_equilibria(f, t, s, i);
        if (std::abs(discriminant(t)) < 1e-4) continue;
        REQUIRE(eq.size() == roots.size());
        for (std::size_t k = 0; k < roots.size(); ++k) CHECK(eq[k][0] == doctest::Approx(roots[k]).epsilon(1e-10));
    }
}

TEST_CASE("property: sheets inside the cusp region are attractor, 1-saddle, attractor") {
    const auto f = builtin("cusp1");
    const Settings s;
    oracle::Rng rng(23);
    int checked = 0;
    for (int i = 0; i < 200 && checked < 40; ++i) {
        const Param t{rng.uniform(0, 1), rng.uniform(-0.4, 0.4)};
        if (discriminant(t) < 1e-3) continue;
        const auto eq = equilibria_at(f, t, s, i);
        REQUIRE(eq.size() == 3);
        CHECK(eq[0].stability.kind == Stability::attractor);
        CHECK(eq[1].stability.is_saddle(1));
        CHECK(eq[2].stability.kind == Stability::attractor);
        ++checked;
    }
    CHECK(checked == 40);
}
