#include "cli.hpp"

#include "cusparity/continuation.hpp"
#include "cusparity/errors.hpp"
#include "cusparity/family_file.hpp"
#include "cusparity/oracle.hpp"
#include "cusparity/render_svg.hpp"
#include "cusparity/report.hpp"
#include "cusparity/settings.hpp"
#include "cusparity/szparity.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

namespace cusparity {

namespace {

struct Options {
    std::string family;
    std::string settings_file;
    std::optional<std::uint64_t> seed;
    std::string report_path;
    std::string out_path;
    bool approximating = false;
};

struct Loaded {
    FamilySpec f;
    std::string source;
};

Loaded load_family(const std::string& arg) {
    if (std::filesystem::exists(arg)) return {load_family_file(arg), arg};
    try {
        return {builtin(arg), "builtin:" + arg};
    } catch (const UnknownFamily&) {
        throw UnknownFamily("'" + arg + "' is neither a family file nor a built-in family");
    }
}

Settings load_settings(const Options& o) {
    Settings s;
    if (!o.settings_file.empty()) s = load_settings_file(o.settings_file, s);
    if (o.seed) s.seed = *o.seed;
    return s;
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v == 0.0 ? 0.0 : v);
    return buf;
}

std::string point(const Param& t) { return "(" + num(t[0]) + ", " + num(t[1]) + ")"; }

std::string state(const Vec& x) {
    std::string s = "(";
    for (Eigen::Index i = 0; i < x.size(); ++i) s += (i ? ", " : "") + num(x[i]);
    return s + ")";
}

void print_sz(std::ostream& out, const FamilySpec& f, const SZReport& sz) {
    out << "S/Z edge: " << to_string(f.box.sz_edge) << "\n";
    out << "branch points: " << sz.edge_branch.points.size() << "\n";
    const char* names[] = {"x1", "x2"};
    for (std::size_t i = 0; i < sz.folds.size() && i < 2; ++i)
        out << "fold " << names[i] << ": theta " << point(sz.folds[i].theta) << " x " << state(sz.folds[i].x) << "\n";
    out << "arcs:";
    for (std::size_t i = 0; i < sz.components.size(); ++i)
        out << (i ? ", " : " ") << to_string(sz.components[i].stability) << " (" << sz.components[i].points.size()
            << ")";
    out << "\n";
    out << "opposed: " << (sz.opposed ? "yes" : "no") << " by " << to_string(sz.opposed_method);
    if (sz.opposed_by_flow) out << " (flow orientation: " << (*sz.opposed_by_flow ? "yes" : "no") << ")";
    out << "\n";
    out << "other edges clean: " << (sz.other_edges_clean ? "yes" : "no") << "\n";
}

void print_curves(std::ostream& out, const std::vector<FoldCurveRecord>& curves, const std::vector<int>& members = {}) {
    out << "fold curves: " << curves.size() << "\n";
    for (const auto& c : curves) {
        out << "curve " << c.id << ": " << (c.closed ? "closed" : "open");
        if (c.start_edge && c.end_edge) out << " " << to_string(*c.start_edge) << " -> " << to_string(*c.end_edge);
        out << ", " << c.points.size() << " points, arclength " << num(c.arclength) << ", cusps "
            << c.cusp_count();
        if (std::find(members.begin(), members.end(), c.id) != members.end()) out << ", member";
        out << "\n";
        for (const auto& m : c.codim2_points)
            out << "  " << to_string(m.kind) << " at theta " << point(m.theta) << " x " << state(m.x) << "\n";
        for (const auto& n : c.notes) out << "  note: " << n << "\n";
    }
}

void print_verdict(std::ostream& out, const ParityVerdict& v) {
    out << "fold-Hopf points: " << v.fh_points.size() << "\n";
    for (const auto& p : v.fh_points) out << "  fold_hopf at theta " << point(p.theta) << "\n";
    out << "member curves:";
    for (int id : v.member_ids) out << " " << id;
    out << "\n";
    out << "cusps: " << v.cusp_count_total << " (" << to_string(v.parity) << ")\n";
    out << "Bogdanov-Takens points: " << v.bt_count << "\n";
    if (v.main_curve_id) out << "main curve: " << *v.main_curve_id << "\n";
    if (v.switch_count) out << "orientation switches: " << *v.switch_count << "\n";
    if (v.closure_discontinuity) out << "closure discontinuity: " << (*v.closure_discontinuity ? "yes" : "no") << "\n";
    for (const auto& n : v.notes) out << "note: " << n << "\n";
    out << "theorem satisfied: " << (v.theorem_satisfied ? "yes" : "no") << "\n";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw ParseError("cannot write " + path);
    f << text;
}

int verdict_code(const ParityVerdict& v) { return v.theorem_satisfied ? exit_ok : exit_negative; }

// A full run: pipeline, printout, optional report and figure.
int full_run(const Options& o, std::ostream& out) {
    const auto [f, source] = load_family(o.family);
    const Settings s = load_settings(o);
    const auto t0 = std::chrono::steady_clock::now();
    const PipelineResult r = run_pipeline(f, s);
    RunReport rep = make_report(f, s, r, source);
    rep.timings.emplace_back("pipeline", seconds_since(t0));
    out << "family: " << f.name << "\n";
    print_sz(out, f, r.sz);
    print_curves(out, r.curves, r.verdict.member_ids);
    print_verdict(out, r.verdict);
    if (!o.report_path.empty()) export_report(rep, o.report_path);
    if (!o.out_path.empty()) write_file(o.out_path, render_svg(rep, {.approximating_curves = o.approximating}));
    return verdict_code(r.verdict);
}

int cmd_boundary(const Options& o, std::ostream& out) {
    const auto [f, source] = load_family(o.family);
    const Settings s = load_settings(o);
    const SZReport sz = boundary_scan(f, s);
    print_sz(out, f, sz);
    if (!o.report_path.empty()) {
        RunReport rep;
        rep.family = describe(f, source);
        rep.settings = s;
        rep.sz = sz;
        export_report(rep, o.report_path);
    }
    if (!sz.opposed) throw SZViolation("the two boundary folds are not opposed");
    return exit_ok;
}

int cmd_fold_curves(const Options& o, std::ostream& out) {
    const auto [f, source] = load_family(o.family);
    const Settings s = load_settings(o);
    const auto curves = enumerate_fold_curves(f, s);
    print_curves(out, curves);
    if (!o.report_path.empty()) {
        RunReport rep;
        rep.family = describe(f, source);
        rep.settings = s;
        for (const auto& c : curves) {
            rep.curves.push_back(decimate_curve(c, s.max_report_points));
            rep.codim2.insert(rep.codim2.end(), c.codim2_points.begin(), c.codim2_points.end());
        }
        export_report(rep, o.report_path);
    }
    return exit_ok;
}

int cmd_plot(const Options& o, std::ostream& out, std::ostream& err) {
    const auto [f, source] = load_family(o.family);
    const Settings s = load_settings(o);
    RunReport rep;
    try {
        rep = make_report(f, s, run_pipeline(f, s), source);
    } catch (const SZViolation& e) {
        // no S/Z structure: draw the fold curves alone
        rep = RunReport{};
        rep.family = describe(f, source);
        rep.settings = s;
        for (const auto& c : enumerate_fold_curves(f, s)) {
            rep.curves.push_back(decimate_curve(c, s.max_report_points));
            rep.codim2.insert(rep.codim2.end(), c.codim2_points.begin(), c.codim2_points.end());
        }
        rep.notes.push_back(std::string("S/Z check failed: ") + e.what());
        err << "warning: " << e.what() << "; plotting fold curves only\n";
    }
    write_file(o.out_path, render_svg(rep, {.approximating_curves = o.approximating}));
    if (!o.report_path.empty()) export_report(rep, o.report_path);
    out << "wrote " << o.out_path << "\n";
    return rep.verdict ? verdict_code(*rep.verdict) : exit_sz_violation;
}

int cmd_oracle(const Options& o, std::ostream& out) {
    const auto [f, source] = load_family(o.family);
    const Settings s = load_settings(o);
    const OracleResult orc = parameter_linear_oracle(f, s);
    const auto curves = enumerate_fold_curves(f, s);
    const OracleDiff d = compare_with_oracle(f, orc, curves, s);
    out << "family: " << f.name << "\n";
    out << "oracle samples: " << orc.samples << " over x in [" << num(orc.x_lo) << ", " << num(orc.x_hi) << "]\n";
    out << "oracle pieces: " << d.oracle_curves << ", cusps: " << d.oracle_cusps << "\n";
    for (const auto& c : orc.cusps)
        out << "  " << (c.sign < 0 ? "cusp_standard" : "cusp_dual") << " at x " << num(c.x) << " theta "
            << point(c.theta) << "\n";
    if (!orc.excluded.empty()) out << "excluded samples (g' = 0): " << orc.excluded.size() << "\n";
    out << "continuation curves: " << d.continuation_curves << ", cusps: " << d.continuation_cusps << "\n";
    out << "max fold-set deviation: " << num(d.hausdorff) << "\n";
    out << "max cusp location error: " << num(d.max_cusp_error) << "\n";
    const bool ok = d.agrees();
    out << "agree: " << (ok ? "yes" : "no") << "\n";
    return ok ? exit_ok : exit_negative;
}

int code_for(const Error& e) {
    if (dynamic_cast<const SZViolation*>(&e)) return exit_sz_violation;
    if (dynamic_cast<const CrossCheckFailure*>(&e)) return exit_cross_check;
    return exit_pipeline_error;
}

void error_block(std::ostream& err, const std::string& kind, const std::string& message, int code) {
    nlohmann::ordered_json j;
    j["error"] = {{"kind", kind}, {"message", message}, {"exit_code", code}};
    err << j.dump() << "\n";
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cusp parity checks for two-parameter families of vector fields", "cusparity"};
    app.require_subcommand(1);
    Options o;
    app.add_option("--settings", o.settings_file, "JSON file overriding gates and resolutions");
    app.add_option("--seed", o.seed, "Seed for the multi-start equilibrium search");
    app.add_option("--report", o.report_path, "Write the run report to this file");

    auto family_arg = [&](CLI::App* sub) {
        sub->add_option("family", o.family, "Family file or built-in name")->required();
    };
    auto* boundary = app.add_subcommand("boundary", "Scan the box boundary and check the S/Z structure");
    family_arg(boundary);
    auto* fold_curves = app.add_subcommand("fold-curves", "Enumerate fold curves with codim-2 markers");
    family_arg(fold_curves);
    auto* verdict = app.add_subcommand("verdict", "Run the full cusp parity pipeline");
    family_arg(verdict);
    verdict->add_option("--out", o.out_path, "Also render the diagram to this SVG file");
    auto* plot = app.add_subcommand("plot", "Render the bifurcation diagram as SVG");
    family_arg(plot);
    plot->add_option("--out", o.out_path, "Output SVG file")->required();
    plot->add_flag("--approximating", o.approximating, "Overlay looping and nudging curves at cusps");
    auto* oracle = app.add_subcommand("oracle", "Compare continuation with the closed-form fold set");
    family_arg(oracle);
    auto* demo = app.add_subcommand("demo", "Run a built-in family end to end");
    demo->add_option("name", o.family, "Built-in family name")->required();
    demo->add_option("--out", o.out_path, "Also render the diagram to this SVG file");

    for (auto* sub : {boundary, fold_curves, verdict, plot, oracle, demo}) {
        sub->add_option("--settings", o.settings_file, "JSON file overriding gates and resolutions");
        sub->add_option("--seed", o.seed, "Seed for the multi-start equilibrium search");
        sub->add_option("--report", o.report_path, "Write the run report to this file");
    }

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        error_block(err, "UsageError", e.what(), exit_pipeline_error);
        return exit_pipeline_error;
    }

    try {
        if (boundary->parsed()) return cmd_boundary(o, out);
        if (fold_curves->parsed()) return cmd_fold_curves(o, out);
        if (plot->parsed()) return cmd_plot(o, out, err);
        if (oracle->parsed()) return cmd_oracle(o, out);
        if (demo->parsed()) {
            builtin(o.family);  // demo accepts built-ins only
            return full_run(o, out);
        }
        return full_run(o, out);
    } catch (const Error& e) {
        const int code = code_for(e);
        error_block(err, e.kind(), e.what(), code);
        return code;
    } catch (const std::exception& e) {
        error_block(err, "InternalError", e.what(), exit_pipeline_error);
        return exit_pipeline_error;
    }
}

} // namespace cusparity
