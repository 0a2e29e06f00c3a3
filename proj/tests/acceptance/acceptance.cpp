// One line per acceptance criterion: "cN PASS|FAIL <title>: <evidence> [seconds]".

#include "oracles.hpp"

#include "cusparity/continuation.hpp"
#include "cusparity/detect.hpp"
#include "cusparity/errors.hpp"
#include "cusparity/oracle.hpp"
#include "cusparity/szparity.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

using namespace cusparity;

namespace {

// pinned tolerances
constexpr double kCusp1Location = 1e-6;
constexpr double kCusp1Rms = 1e-6;
constexpr double kCusp1Seconds = 10.0;
constexpr double kQuinticLocation = 1e-5;
constexpr double kQuinticSeconds = 30.0;
constexpr double kBtLocation = 1e-6;
constexpr double kFhLocation = 1e-6;
constexpr double kOracleHausdorff = 1e-4;
constexpr double kLoopAmplitude = 0.01;
constexpr double kLoopSpan = 0.1;
constexpr double kTransportDot = 0.9;
constexpr double kJacobianRel = 1e-6;
constexpr double kSymmetry = 1e-6;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    std::vector<std::string> failed;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            failed.push_back(what);
        }
    }
};

std::string g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string pt(const Param& t) { return "(" + g(t[0]) + ", " + g(t[1]) + ")"; }

const FoldCurveRecord* main_curve(const PipelineResult& r) {
    if (!r.verdict.main_curve_id) return nullptr;
    for (const auto& c : r.curves)
        if (c.id == *r.verdict.main_curve_id) return &c;
    return nullptr;
}

std::vector<Codim2Point> markers(const std::vector<FoldCurveRecord>& curves, std::initializer_list<Codim2Kind> kinds) {
    std::vector<Codim2Point> out;
    for (const auto& c : curves)
        for (const auto& m : c.codim2_points)
            for (auto k : kinds)
                if (m.kind == k) out.push_back(m);
    return out;
}

double seconds(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void c1(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    const PipelineResult r = run_pipeline(builtin("cusp1"), Settings{});
    const double dt = seconds(t0);
    const auto cusps = markers(r.curves, {Codim2Kind::cusp_standard, Codim2Kind::cusp_dual});
    const double loc = cusps.size() == 1 ? cusps[0].theta.norm() : INFINITY;
    double ss = 0.0;
    std::size_t n = 0;
    for (const auto& c : r.curves)
        for (const auto& p : c.points) {
            // 4 t1^3 = 27 t2^2 solved for |t2|
            const double ref = std::sqrt(std::max(0.0, 4.0 * std::pow(p.theta[0], 3) / 27.0));
            ss += std::pow(std::abs(p.theta[1]) - ref, 2);
            ++n;
        }
    const double rms = n ? std::sqrt(ss / double(n)) : INFINITY;
    o.detail << "cusps " << cusps.size() << " at distance " << g(loc) << " from origin, curve RMS " << g(rms)
             << ", opposed " << r.sz.opposed << ", parity " << to_string(r.verdict.parity) << ", satisfied "
             << r.verdict.theorem_satisfied << ", " << g(dt) << " s";
    o.require(cusps.size() == 1 && r.verdict.cusp_count_total == 1, "exactly 1 cusp");
    o.require(loc <= kCusp1Location, "cusp within 1e-6 of (0,0)");
    o.require(rms < kCusp1Rms, "RMS < 1e-6");
    o.require(r.sz.folds.size() == 2 && r.sz.opposed && r.sz.other_edges_clean, "S/Z valid and opposed");
    o.require(r.verdict.parity == Parity::odd && r.verdict.theorem_satisfied, "odd and satisfied");
    o.require(dt < kCusp1Seconds, "runtime < 10 s");
}

void c2(Outcome& o) {
    const FamilySpec f = builtin("quintic3");
    const Settings s;
    const auto t0 = std::chrono::steady_clock::now();
    const PipelineResult r = run_pipeline(f, s);
    const double dt = seconds(t0);
    const OracleResult orc = parameter_linear_oracle(f, s);
    const auto cusps = markers(r.curves, {Codim2Kind::cusp_standard, Codim2Kind::cusp_dual});
    double worst = 0.0;
    for (const auto& oc : orc.cusps) {
        double best = INFINITY;
        for (const auto& m : cusps) best = std::min(best, (m.theta - oc.theta).norm());
        worst = std::max(worst, best);
    }
    o.detail << "cusps " << cusps.size() << " (oracle " << orc.cusps.size() << ") worst location error " << g(worst)
             << ", parity " << to_string(r.verdict.parity) << ", satisfied " << r.verdict.theorem_satisfied << ", "
             << g(dt) << " s";
    const Param expected[] = {{0.0, 0.0}, {-1.8, 0.7436128025}, {-1.8, -0.7436128025}};
    bool at_expected = true;
    for (const auto& e : expected) {
        bool hit = false;
        for (const auto& oc : orc.cusps) hit = hit || (oc.theta - e).norm() < 1e-9;
        at_expected = at_expected && hit;
    }
    o.require(cusps.size() == 3 && r.verdict.cusp_count_total == 3 && orc.cusps.size() == 3, "exactly 3 cusps");
    o.require(at_expected, "oracle cusps at (0,0) and (-1.8, +-0.7436)");
    o.require(worst <= kQuinticLocation, "within 1e-5 of the oracle");
    o.require(r.verdict.parity == Parity::odd && r.verdict.theorem_satisfied, "odd and satisfied");
    o.require(dt < kQuinticSeconds, "runtime < 30 s");
}

void c3(Outcome& o) {
    const auto curves = enumerate_fold_curves(builtin("bt2"), Settings{});
    const FoldCurveRecord* carrier = nullptr;
    Codim2Point bt;
    int bts = 0;
    for (const auto& c : curves)
        for (const auto& m : c.codim2_points)
            if (m.kind == Codim2Kind::bogdanov_takens) {
                ++bts;
                carrier = &c;
                bt = m;
            }
    o.require(bts == 1 && carrier, "exactly one BT marker");
    if (!carrier) return;
    const double loc = std::max(bt.theta.norm(), bt.x.norm());
    const int switches = orientation_switches(carrier->points);
    o.detail << "BT at " << pt(bt.theta) << " (distance " << g(loc) << "), switches " << switches << ", cusps "
             << carrier->cusp_count();
    o.require(loc <= kBtLocation, "BT within 1e-6 of the origin");
    o.require(switches == 0, "0 orientation switches through BT");
    o.require(carrier->cusp_count() == 0, "0 cusps on the curve");
}

void c4(Outcome& o) {
    const PipelineResult r = run_pipeline(builtin("fh3"), Settings{});
    const Param constructed[] = {{0.12, -0.016}, {0.48, -0.128}};
    double worst = 0.0;
    for (const auto& e : constructed) {
        double best = INFINITY;
        for (const auto& p : r.verdict.fh_points) best = std::min(best, (p.theta - e).norm());
        worst = std::max(worst, best);
    }
    o.detail << "fh_found " << r.verdict.fh_found << ", " << r.verdict.fh_points.size()
             << " fH points, worst distance to constructed " << g(worst) << ", satisfied "
             << r.verdict.theorem_satisfied;
    o.require(r.verdict.fh_found && r.verdict.theorem_satisfied, "fH branch of the verdict");
    o.require(worst <= kFhLocation, "fH within 1e-6 of (0.12,-0.016) and (0.48,-0.128)");
}

void c5(Outcome& o) {
    const Settings s;
    int families = 0;
    for (const auto& name : builtin_names()) {
        const FamilySpec f = builtin(name);
        if (!f.linear_form) continue;
        ++families;
        const OracleResult orc = parameter_linear_oracle(f, s);
        const OracleDiff d = compare_with_oracle(f, orc, enumerate_fold_curves(f, s), s);
        o.detail << name << " H=" << g(d.hausdorff) << " cusps " << d.continuation_cusps << "/" << d.oracle_cusps
                 << "; ";
        o.require(d.hausdorff < kOracleHausdorff, name + " Hausdorff < 1e-4");
        o.require(d.oracle_cusps == d.continuation_cusps, name + " cusp counts");
    }
    o.require(families >= 4, "at least the four parameter-linear built-ins");
}

void c6(Outcome& o) {
    for (const char* name : {"cusp1", "quintic3"}) {
        const PipelineResult r = run_pipeline(builtin(name), Settings{});
        const FoldCurveRecord* mc = main_curve(r);
        if (!mc || !r.verdict.switch_count) {
            o.require(false, std::string(name) + " traversal");
            continue;
        }
        const int sw = *r.verdict.switch_count;
        const int cusps = int(mc->cusp_count());
        const int closure = r.verdict.closure_discontinuity.value_or(false) ? 1 : 0;
        o.detail << name << ": switch_count " << sw << ", main-curve cusps " << cusps << ", (switch_count + 1) mod 2 = "
                 << (sw + 1) % 2 << " vs cusps mod 2 = " << cusps % 2 << " (switch_count + closure " << closure
                 << " = " << sw + closure << "); ";
        o.require((sw + 1) % 2 == cusps % 2, std::string(name) + " (switch_count + 1) mod 2 == cusps mod 2");
    }
}

void c7(Outcome& o) {
    const PipelineResult r = run_pipeline(builtin("dwell_grad"), Settings{});
    o.detail << "method " << to_string(r.sz.opposed_method) << ", opposed " << r.sz.opposed << ", by flow "
             << (r.sz.opposed_by_flow ? (*r.sz.opposed_by_flow ? "1" : "0") : "n/a") << ", cusps "
             << r.verdict.cusp_count_total << " (" << to_string(r.verdict.parity) << ")";
    o.require(r.sz.opposed_method == OpposedMethod::potential_slope && r.sz.opposed, "opposed by potential slope");
    o.require(r.sz.opposed_by_flow && *r.sz.opposed_by_flow, "flow orientation agrees");
    o.require(r.verdict.cusp_count_total == 1 && r.verdict.parity == Parity::odd, "1 cusp, odd");
}

void c8(Outcome& o) {
    const FamilySpec f = builtin("cusp1");
    const Settings s;
    const auto cusps = markers(enumerate_fold_curves(f, s), {Codim2Kind::cusp_standard});
    o.require(cusps.size() == 1, "one cusp marker");
    if (cusps.size() != 1) return;
    struct Case {
        const char* name;
        double amplitude;
        StabilityClass expect;
    };
    for (const Case& c : {Case{"looping", kLoopAmplitude, {Stability::attractor, 0}},
                          Case{"nudging", -kLoopAmplitude, {Stability::saddle, 1}}}) {
        const ParamPolyline base = closed_approximating_curve(cusps[0], c.amplitude, kLoopSpan);
        const Vec seed = approximating_curve_seed(cusps[0], c.amplitude, kLoopSpan);
        const LiftedCurve lc = lift_curve(f, base, seed, s);
        std::size_t matching = 0;
        for (const auto& st : lc.stability) matching += st == c.expect ? 1 : 0;
        o.detail << c.name << " (phi " << g(c.amplitude) << "): " << matching << "/" << lc.stability.size() << " "
                 << to_string(c.expect) << ", closed base " << lc.closed_base << ", end gap " << g(lc.end_gap)
                 << ", simple " << lc.simple << "; ";
        o.require(matching == lc.stability.size(), std::string(c.name) + " classification at every sample");
        o.require(lc.closed_base && lc.simple, std::string(c.name) + " simple closed-base lift");
    }
}

void c9(Outcome& o) {
    const Settings s;
    oracle::Rng rng(9);

    // null-direction transport continuity
    double worst_dot = 1.0;
    std::size_t curves = 0;
    for (const auto& name : builtin_names())
        for (const auto& c : enumerate_fold_curves(builtin(name), s)) {
            ++curves;
            for (std::size_t i = 1; i < c.points.size(); ++i)
                worst_dot = std::min(worst_dot, c.points[i - 1].nullpair.q.dot(c.points[i].nullpair.q));
        }
    o.detail << "transport min <q_i,q_i+1> " << g(worst_dot) << " over " << curves << " curves; ";
    o.require(worst_dot > kTransportDot, "transport continuity > 0.9");

    // analytic against finite-difference Jacobians
    double worst_rel = 0.0;
    for (const auto& name : builtin_names()) {
        const FamilySpec f = builtin(name);
        if (!f.jac_x) continue;
        for (int k = 0; k < 50; ++k) {
            Vec x(f.dim);
            for (int i = 0; i < f.dim; ++i) x[i] = rng.uniform(-1.5, 1.5);
            const Param t{rng.uniform(f.box.lo[0], f.box.hi[0]), rng.uniform(f.box.lo[1], f.box.hi[1])};
            const Mat J = jacobian_x(f, x, t);
            worst_rel = std::max(worst_rel, (jacobian_x_fd(f, x, t) - J).norm() / std::max(1.0, J.norm()));
        }
    }
    o.detail << "Jacobian relative error " << g(worst_rel) << "; ";
    o.require(worst_rel < kJacobianRel, "FD vs analytic Jacobian < 1e-6");

    // sign of a under q -> -q and under positive rescaling of the field
    int samples = 0, flip_kept = 0, rescale_kept = 0, direction_kept = 0;
    for (const char* name : {"cusp1", "quintic3", "fh3"}) {
        const FamilySpec f = builtin(name);
        FamilySpec scaled = f;
        scaled.rhs = [f](const Vec& x, const Param& t) {
            return ((2.0 + std::sin(x[0] + t[0])) * eval_rhs(f, x, t)).eval();
        };
        scaled.jac_x = nullptr;
        scaled.jac_theta = nullptr;
        for (const auto& c : enumerate_fold_curves(f, s))
            for (std::size_t i = 0; i < c.points.size(); i += 3) {
                const FoldPoint& p = c.points[i];
                if (p.nullpair.bt_flag || !(std::abs(p.a_coeff) > 1e-3)) continue;
                ++samples;
                const FoldPoint flipped = make_fold_point(f, p.x, -p.nullpair.q, p.theta, s);
                const FoldPoint same = make_fold_point(f, p.x, p.nullpair.q, p.theta, s);
                const FoldPoint rescaled = make_fold_point(scaled, p.x, p.nullpair.q, p.theta, s);
                flip_kept += (flipped.a_coeff > 0) == (same.a_coeff > 0) ? 1 : 0;
                rescale_kept += (rescaled.a_coeff > 0) == (same.a_coeff > 0) ? 1 : 0;
                const Vec d0 = (same.a_coeff > 0 ? 1.0 : -1.0) * same.nullpair.q;
                const Vec d1 = (flipped.a_coeff > 0 ? 1.0 : -1.0) * flipped.nullpair.q;
                direction_kept += d0.dot(d1) > 0 ? 1 : 0;
            }
    }
    o.detail << "sign(a) kept under q-flip " << flip_kept << "/" << samples << ", under rescaling " << rescale_kept
             << "/" << samples << ", sign(a) q kept under q-flip " << direction_kept << "/" << samples << "; ";
    o.require(samples > 0 && flip_kept == samples, "a_coeff sign invariant under q-flip");
    o.require(samples > 0 && rescale_kept == samples, "a_coeff sign invariant under positive rescaling");

    // gradient families have symmetric Jacobians
    const FamilySpec grad2 = gradient_family_from_expression(
        "grad2", Expression::parse("x1^4/4 + x2^4/4 + x1^2*x2^2/2 - t1*x1*x2 - t2*x1 + x2*x1^3/3", 2), ParamBox());
    double worst_sym = 0.0;
    for (const FamilySpec* f : {&grad2}) {
        for (int k = 0; k < 100; ++k) {
            Vec x(f->dim);
            for (int i = 0; i < f->dim; ++i) x[i] = rng.uniform(-1.5, 1.5);
            const Param t{rng.uniform(-1, 1), rng.uniform(-1, 1)};
            const Mat J = jacobian_x(*f, x, t);
            worst_sym = std::max(worst_sym, (J - J.transpose()).norm() / std::max(1.0, J.norm()));
        }
    }
    const FamilySpec dwell = builtin("dwell_grad");
    o.detail << "gradient Jacobian asymmetry " << g(worst_sym);
    o.require(dwell.kind == FamilyKind::gradient, "dwell_grad is a gradient family");
    o.require(worst_sym < kSymmetry, "gradient Jacobian symmetry < 1e-6");
}

struct Criterion {
    const char* title;
    std::function<void(Outcome&)> run;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all{
        {"cusp normal family", c1},
        {"quintic three-cusp family", c2},
        {"BT normal form", c3},
        {"fold-Hopf demo", c4},
        {"oracle equivalence", c5},
        {"parity cross-check identity", c6},
        {"gradient path", c7},
        {"approximating-curve lifts", c8},
        {"property suites", c9},
    };
    return all;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    int only = 0;
    app.add_option("--criterion", only, "Run a single criterion (1-9)")->check(CLI::Range(1, 9));
    CLI11_PARSE(app, argc, argv);

    bool all_pass = true;
    for (std::size_t i = 0; i < criteria().size(); ++i) {
        if (only && int(i) + 1 != only) continue;
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            criteria()[i].run(o);
        } catch (const Error& e) {
            o.require(false, std::string(e.kind()) + ": " + e.what());
        }
        all_pass = all_pass && o.pass;
        std::string detail = o.detail.str();
        while (!detail.empty() && (detail.back() == ' ' || detail.back() == ';')) detail.pop_back();
        std::cout << "c" << i + 1 << " " << (o.pass ? "PASS" : "FAIL") << " " << criteria()[i].title << ": " << detail;
        for (std::size_t k = 0; k < o.failed.size(); ++k) std::cout << (k ? "; " : " | failed: ") << o.failed[k];
        std::cout << " [" << g(seconds(t0)) << " s]" << std::endl;
    }
    return all_pass ? 0 : 1;
}
