#include "doctest.h"
#include "oracles.hpp"

#include "cli.hpp"
#include "cusparity/continuation.hpp"
#include "cusparity/errors.hpp"
#include "cusparity/family_file.hpp"
#include "cusparity/oracle.hpp"
#include "cusparity/render_svg.hpp"
#include "cusparity/report.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace cusparity;
namespace fs = std::filesystem;

namespace {

const fs::path kData = CUSPARITY_DATA_DIR;

struct CliRun {
    int code;
    std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path temp_file(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "cusparity_tests";
    fs::create_directories(dir);
    return dir / name;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t count(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

double field(const std::string& text, const std::string& label) {
    const auto pos = text.find(label);
    REQUIRE(pos != std::string::npos);
    return std::stod(text.substr(pos + label.size()));
}

const PipelineResult& cusp1_result() {
    static const PipelineResult r = run_pipeline(builtin("cusp1"), Settings{});
    return r;
}

void check_same(const FoldPoint& a, const FoldPoint& b) {
    CHECK(a.x == b.x);
    CHECK(a.theta == b.theta);
    CHECK(a.nullpair.q == b.nullpair.q);
    CHECK(a.nullpair.p == b.nullpair.p);
    CHECK(a.nullpair.pq == b.nullpair.pq);
    CHECK(a.p_unit == b.p_unit);
    CHECK(a.a_coeff == b.a_coeff);
    CHECK(a.orientation == b.orientation);
    CHECK(a.psi_cusp == b.psi_cusp);
    CHECK(a.psi_bt == b.psi_bt);
    CHECK((a.psi_fh == b.psi_fh || (std::isnan(a.psi_fh) && std::isnan(b.psi_fh))));
    CHECK(a.arclength == b.arclength);
}

} // namespace

TEST_CASE("oracle: cusp1 fold set is theta1 = 3x^2, theta2 = -2x^3 with a cusp at 0") {
    const auto o = parameter_linear_oracle(builtin("cusp1"), Settings{});
    REQUIRE(o.pieces.size() == 1);
    const auto& xs = o.piece_x[0];
    for (std::size_t i = 0; i < xs.size(); i += 997) {
        CHECK(o.pieces[0][i][0] == doctest::Approx(3 * xs[i] * xs[i]).epsilon(1e-12));
        CHECK(o.pieces[0][i][1] == doctest::Approx(-2 * xs[i] * xs[i] * xs[i]).epsilon(1e-12));
    }
    REQUIRE(o.cusp_count() == 1);
    CHECK(std::abs(o.cusps[0].x) < 1e-12);
    CHECK(o.cusps[0].sign == -1);
    // clipped at theta1 = 1, i.e. |x| = 1/sqrt(3)
    CHECK(xs.front() == doctest::Approx(-1 / std::sqrt(3.0)).epsilon(1e-10));
    CHECK(xs.back() == doctest::Approx(1 / std::sqrt(3.0)).epsilon(1e-10));
}

TEST_CASE("oracle: quintic3 cusps at 0 and +-sqrt(0.6)") {
    const auto o = parameter_linear_oracle(builtin("quintic3"), Settings{});
    REQUIRE(o.pieces.size() == 1);
    const auto& xs = o.piece_x[0];
    for (std::size_t i = 0; i < xs.size(); i += 1009) {
        const double x = xs[i];
        CHECK(o.pieces[0][i][0] == doctest::Approx(5 * std::pow(x, 4) - 6 * x * x).epsilon(1e-12));
        CHECK(o.pieces[0][i][1] == doctest::Approx(4 * x * x * x * (1 - x * x)).epsilon(1e-12));
    }
    REQUIRE(o.cusp_count() == 3);
    CHECK(o.cusps[0].x == doctest::Approx(-std::sqrt(0.6)).epsilon(1e-12));
    CHECK(std::abs(o.cusps[1].x) < 1e-12);
    CHECK(o.cusps[2].x == doctest::Approx(std::sqrt(0.6)).epsilon(1e-12));
    CHECK(o.cusps[0].theta[0] == doctest::Approx(-1.8));
    CHECK(o.cusps[2].theta[1] == doctest::Approx(0.7436128025).epsilon(1e-9));
    CHECK(o.cusps[0].sign == -1);
    CHECK(o.cusps[1].sign == 1);
    CHECK(o.cusps[2].sign == -1);
}

TEST_CASE("oracle: dual family has the reversed cusp sign") {
    const auto o = parameter_linear_oracle(builtin("dualcusp1"), Settings{});
    REQUIRE(o.cusp_count() == 1);
    CHECK(o.cusps[0].sign == 1);
    CHECK(o.pieces[0][o.pieces[0].size() / 2][0] == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("oracle: vanishing g' is excluded and logged") {
    const FamilySpec f = parse_family_text("name = sq\ndim = 1\nrhs1 = t2 + t1*x1^2 - x1^3\n");
    REQUIRE(f.linear_form);
    const auto o = parameter_linear_oracle(f, Settings{});
    REQUIRE(o.excluded.size() == 1);
    CHECK(o.excluded[0] == 0.0);
    for (std::size_t p = 0; p < o.pieces.size(); ++p)
        for (std::size_t i = 0; i < o.pieces[p].size(); i += 501)
            CHECK(o.pieces[p][i][0] == doctest::Approx(1.5 * o.piece_x[p][i]).epsilon(1e-12));
}

TEST_CASE("oracle: rejects families that are not parameter-linear") {
    CHECK_THROWS_AS(parameter_linear_oracle(builtin("bt2"), Settings{}), NotParameterLinear);
    CHECK_THROWS_AS(parameter_linear_oracle(builtin("fh3"), Settings{}), NotParameterLinear);
}

TEST_CASE("property: continuation matches the oracle on every parameter-linear built-in") {
    for (const auto& name : builtin_names()) {
        const FamilySpec f = builtin(name);
        if (!f.linear_form) continue;
        CAPTURE(name);
        const Settings s;
        const auto o = parameter_linear_oracle(f, s);
        const auto d = compare_with_oracle(f, o, enumerate_fold_curves(f, s), s);
        CHECK(d.hausdorff < 1e-4);
        CHECK(d.oracle_cusps == d.continuation_cusps);
        CHECK(d.max_cusp_error <= 1e-6);
    }
}

TEST_CASE("report: cusp1 round-trips field by field") {
    const FamilySpec f = builtin("cusp1");
    RunReport rep = make_report(f, Settings{}, cusp1_result(), "builtin:cusp1");
    rep.timings.emplace_back("pipeline", 0.5);
    rep.notes.push_back("nan \"quoted\" note");
    const RunReport back = report_from_string(report_to_string(rep));

    CHECK(back.family == rep.family);
    CHECK(back.settings == rep.settings);
    REQUIRE(back.sz);
    CHECK(back.sz->edge_branch.points.size() == rep.sz->edge_branch.points.size());
    for (std::size_t i = 0; i < rep.sz->edge_branch.points.size(); ++i) {
        const auto &a = rep.sz->edge_branch.points[i], &b = back.sz->edge_branch.points[i];
        CHECK(a.x == b.x);
        CHECK(a.theta == b.theta);
        CHECK(a.s == b.s);
        CHECK(a.stability == b.stability);
        CHECK(a.spectrum.eigenvalues == b.spectrum.eigenvalues);
    }
    REQUIRE(back.sz->folds.size() == 2);
    for (int i = 0; i < 2; ++i) check_same(rep.sz->folds[i], back.sz->folds[i]);
    CHECK(back.sz->opposed == rep.sz->opposed);
    CHECK(back.sz->edges.size() == rep.sz->edges.size());
    REQUIRE(back.curves.size() == rep.curves.size());
    for (std::size_t c = 0; c < rep.curves.size(); ++c) {
        REQUIRE(back.curves[c].points.size() == rep.curves[c].points.size());
        for (std::size_t i = 0; i < rep.curves[c].points.size(); ++i)
            check_same(rep.curves[c].points[i], back.curves[c].points[i]);
        CHECK(back.curves[c].start_edge == rep.curves[c].start_edge);
        CHECK(back.curves[c].codim2_points.size() == rep.curves[c].codim2_points.size());
    }
    REQUIRE(back.codim2.size() == 1);
    CHECK(back.codim2[0].kind == Codim2Kind::cusp_standard);
    CHECK(back.codim2[0].theta == rep.codim2[0].theta);
    CHECK(back.codim2[0].c_coeff == rep.codim2[0].c_coeff);
    CHECK(back.codim2[0].frame.has_value() == rep.codim2[0].frame.has_value());
    REQUIRE(back.verdict);
    CHECK(back.verdict->theorem_satisfied);
    CHECK(back.verdict->cusp_count_total == 1);
    CHECK(back.verdict->switch_count == rep.verdict->switch_count);
    CHECK(back.verdict->member_ids == rep.verdict->member_ids);
    CHECK(back.verdict->membership.size() == rep.verdict->membership.size());
    CHECK(back.timings == rep.timings);
    CHECK(back.notes == rep.notes);
    CHECK(report_to_string(back) == report_to_string(rep));
}

TEST_CASE("report: file export and import") {
    RunReport rep;
    rep.family = describe(builtin("quintic3"));
    const auto path = temp_file("plain.json");
    export_report(rep, path);
    const RunReport back = import_report(path);
    CHECK(back.family == rep.family);
    CHECK_FALSE(back.sz);
    CHECK_FALSE(back.verdict);
}

TEST_CASE("report: non-finite values survive") {
    RunReport rep;
    FoldCurveRecord c;
    FoldPoint p;
    p.x = Vec::Constant(1, 0.25);
    p.psi_fh = std::nan("");
    p.a_coeff = INFINITY;
    p.psi_bt = -INFINITY;
    c.points.push_back(p);
    rep.curves.push_back(c);
    const auto back = report_from_string(report_to_string(rep));
    CHECK(std::isnan(back.curves[0].points[0].psi_fh));
    CHECK(back.curves[0].points[0].a_coeff == INFINITY);
    CHECK(back.curves[0].points[0].psi_bt == -INFINITY);
}

TEST_CASE("report: future schema version raises SchemaMismatch") {
    std::string text = report_to_string(RunReport{});
    const auto pos = text.find("\"version\": 1");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 12, "\"version\": 2");
    CHECK_THROWS_AS(report_from_string(text), SchemaMismatch);
    CHECK_THROWS_AS(report_from_string("{\"schema\": \"other\", \"version\": 1}"), SchemaMismatch);
    CHECK_THROWS_AS(report_from_string("{\"schema\": "), ParseError);
}

TEST_CASE("report: a 10k-point curve decimates and re-imports identically") {
    FoldCurveRecord c;
    oracle::Rng rng(7);
    for (int i = 0; i < 10000; ++i) {
        FoldPoint p;
        const double t = i * 1e-4;
        p.x = Vec::Constant(1, std::sin(t) + rng.uniform(-1e-3, 1e-3));
        p.theta = {t, t * t / 3.0};
        p.arclength = t;
        p.orientation = t < 0.5 ? 1 : -1;
        c.points.push_back(p);
    }
    Codim2Point m;
    m.theta = c.points[4321].theta;
    m.arclength = c.points[4321].arclength;
    c.codim2_points.push_back(m);

    const FoldCurveRecord d = decimate_curve(c, 5000);
    CHECK(d.points.size() <= 5000);
    CHECK(d.points.size() > 4900);
    CHECK(d.points.front().arclength == c.points.front().arclength);
    CHECK(d.points.back().arclength == c.points.back().arclength);
    int around = 0;
    for (const auto& p : d.points)
        if (p.arclength >= c.points[4320].arclength && p.arclength <= c.points[4322].arclength) ++around;
    CHECK(around == 3);

    RunReport rep;
    rep.curves.push_back(d);
    const auto back = report_from_string(report_to_string(rep));
    REQUIRE(back.curves[0].points.size() == d.points.size());
    CHECK(back.curves[0].parameters() == d.parameters());
    for (std::size_t i = 0; i < d.points.size(); ++i) CHECK(back.curves[0].points[i].x == d.points[i].x);

    CHECK(decimate_curve(d, 5000).points.size() == d.points.size());
}

TEST_CASE("render: deterministic output with one cusp glyph for cusp1") {
    const RunReport rep = make_report(builtin("cusp1"), Settings{}, cusp1_result());
    const std::string a = render_svg(rep), b = render_svg(rep);
    CHECK(a == b);
    CHECK(a.rfind("<svg", 0) == 0);
    CHECK(count(a, "class=\"cusp_standard\"") == 1);
    CHECK(count(a, "class=\"curve member\"") == 1);
    CHECK(count(a, "class=\"inset\"") == 1);
    CHECK(count(a, "class=\"boundary_fold\"") == 4);
    CHECK(render_svg(report_from_string(report_to_string(rep))) == a);
    const std::string over = render_svg(rep, {.approximating_curves = true});
    CHECK(count(over, "class=\"looping\"") == 1);
    CHECK(count(over, "class=\"nudging\"") == 1);
}

TEST_CASE("render: empty fold-curve list draws the box and boundary only") {
    RunReport rep;
    rep.family = describe(builtin("cusp1"));
    rep.sz = cusp1_result().sz;
    const std::string svg = render_svg(rep);
    CHECK(count(svg, "class=\"box\"") == 1);
    CHECK(count(svg, "class=\"sz_edge\"") == 1);
    CHECK(count(svg, "class=\"curve") == 0);
    CHECK(count(svg, "class=\"cusp_") == 0);
}

TEST_CASE("render: quintic3 shows one curve and three cusp glyphs") {
    const FamilySpec f = builtin("quintic3");
    RunReport rep;
    rep.family = describe(f);
    for (const auto& c : enumerate_fold_curves(f, Settings{})) {
        rep.curves.push_back(c);
        rep.codim2.insert(rep.codim2.end(), c.codim2_points.begin(), c.codim2_points.end());
    }
    const std::string svg = render_svg(rep);
    CHECK(count(svg, "class=\"curve") == 1);
    CHECK(count(svg, "class=\"cusp_standard\"") + count(svg, "class=\"cusp_dual\"") == 3);
}

TEST_CASE("cli: verdict on cusp1 exits 0 and reports one cusp") {
    const auto rpath = temp_file("cusp1_report.json");
    const auto r = cli({"verdict", (kData / "cusp1.fam").string(), "--report", rpath.string()});
    CHECK(r.code == exit_ok);
    CHECK(r.out.find("cusps: 1 (odd)") != std::string::npos);
    CHECK(r.out.find("theorem satisfied: yes") != std::string::npos);
    const RunReport rep = import_report(rpath);
    REQUIRE(rep.verdict);
    CHECK(rep.verdict->cusp_count_total == 1);
    CHECK(rep.family.name == "cusp1_file");
}

TEST_CASE("cli: family file with a typo exits 2 naming the line") {
    const auto r = cli({"verdict", (kData / "typo.fam").string()});
    CHECK(r.code == exit_pipeline_error);
    CHECK(r.err.find("\"kind\":\"ParseError\"") != std::string::npos);
    CHECK(r.err.find("line 3") != std::string::npos);
    CHECK(r.out.empty());
}

TEST_CASE("cli: S/Z violation exits 1 with an error block") {
    const auto r = cli({"verdict", (kData / "dualcusp1.fam").string()});
    CHECK(r.code == exit_sz_violation);
    CHECK(r.err.find("{\"error\":{\"kind\":\"SZViolation\"") == 0);
    CHECK(cli({"boundary", "bt2"}).code == exit_sz_violation);
}

TEST_CASE("cli: oracle on quintic3 reports deviation below 1e-4") {
    const auto r = cli({"oracle", (kData / "quintic3.fam").string()});
    CHECK(r.code == exit_ok);
    CHECK(field(r.out, "max fold-set deviation: ") < 1e-4);
    CHECK(r.out.find("oracle pieces: 1, cusps: 3") != std::string::npos);
    CHECK(cli({"oracle", "bt2"}).code == exit_pipeline_error);
}

TEST_CASE("cli: verdict exit code is 0 exactly when the theorem is satisfied") {
    for (const char* name : {"quintic3", "dwell_grad", "fh3"}) {
        CAPTURE(name);
        const auto r = cli({"verdict", name});
        const bool satisfied = r.out.find("theorem satisfied: yes") != std::string::npos;
        CHECK(satisfied);
        CHECK((r.code == exit_ok) == satisfied);
    }
}

TEST_CASE("cli: plot falls back to fold curves when the S/Z check fails") {
    const auto svg = temp_file("dual.svg");
    fs::remove(svg);
    const auto r = cli({"plot", "dualcusp1", "--out", svg.string()});
    CHECK(r.code == exit_sz_violation);
    REQUIRE(fs::exists(svg));
    const std::string text = read_file(svg);
    CHECK(count(text, "class=\"curve") == 1);
    CHECK(count(text, "class=\"cusp_dual\"") == 1);
}

TEST_CASE("cli: boundary, fold-curves, demo and usage errors") {
    const auto b = cli({"boundary", "cusp1"});
    CHECK(b.code == exit_ok);
    CHECK(b.out.find("arcs: attractor") != std::string::npos);
    const auto fc = cli({"fold-curves", "quintic3", "--seed", "11"});
    CHECK(fc.code == exit_ok);
    CHECK(count(fc.out, "cusp_") == 3);
    CHECK(cli({"demo", "cusp1"}).code == exit_ok);
    CHECK(cli({"demo", (kData / "cusp1.fam").string()}).code == exit_pipeline_error);
    CHECK(cli({}).code == exit_pipeline_error);
    CHECK(cli({"verdict"}).code == exit_pipeline_error);
    CHECK(cli({"verdict", "no_such_family"}).code == exit_pipeline_error);
}

TEST_CASE("cli: settings file overrides resolutions") {
    const auto spath = temp_file("settings.json");
    {
        std::ofstream(spath) << "{\"oracle_points\": 2001}";
    }
    const auto r = cli({"oracle", "cusp1", "--settings", spath.string()});
    CHECK(r.out.find("oracle samples: 2001") != std::string::npos);
    {
        std::ofstream(spath) << "{\"no_such_gate\": 1}";
    }
    CHECK(cli({"oracle", "cusp1", "--settings", spath.string()}).code == exit_pipeline_error);
}
