#include "cusparity/report.hpp"

#include "cusparity/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace cusparity {

namespace {

using nlohmann::ordered_json;
using json = ordered_json;

// Non-finite values travel as strings.
json num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double get_num(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "nan") return std::nan("");
        if (s == "inf") return INFINITY;
        if (s == "-inf") return -INFINITY;
        throw ParseError("report: bad number '" + s + "'");
    }
    return j.get<double>();
}

json vec(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
    return a;
}

Vec get_vec(const json& j) {
    Vec v(Eigen::Index(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[Eigen::Index(i)] = get_num(j[i]);
    return v;
}

json param(const Param& p) { return json::array({num(p[0]), num(p[1])}); }
Param get_param(const json& j) { return {get_num(j.at(0)), get_num(j.at(1))}; }

std::string_view kind_name(Stability k) {
    switch (k) {
    case Stability::attractor: return "attractor";
    case Stability::saddle: return "saddle";
    case Stability::nonhyperbolic: return "nonhyperbolic";
    }
    return "nonhyperbolic";
}

Stability kind_from(const std::string& s) {
    if (s == "attractor") return Stability::attractor;
    if (s == "saddle") return Stability::saddle;
    if (s == "nonhyperbolic") return Stability::nonhyperbolic;
    throw ParseError("report: unknown stability '" + s + "'");
}

json stab(const StabilityClass& c) { return json{{"kind", kind_name(c.kind)}, {"index", c.index}}; }
StabilityClass get_stab(const json& j) { return {kind_from(j.at("kind").get<std::string>()), j.at("index").get<int>()}; }

json spectrum(const Spectrum& sp) {
    json ev = json::array();
    for (auto l : sp.eigenvalues) ev.push_back(json::array({num(l.real()), num(l.imag())}));
    return json{{"eigenvalues", ev}, {"gap_ratio", num(sp.gap_ratio)}};
}

Spectrum get_spectrum(const json& j) {
    Spectrum sp;
    for (const auto& e : j.at("eigenvalues")) sp.eigenvalues.emplace_back(get_num(e.at(0)), get_num(e.at(1)));
    sp.gap_ratio = get_num(j.at("gap_ratio"));
    return sp;
}

json branch_point(const BranchPoint& b) {
    return json{{"x", vec(b.x)},
                {"theta", param(b.theta)},
                {"s", num(b.s)},
                {"spectrum", spectrum(b.spectrum)},
                {"stability", stab(b.stability)}};
}

BranchPoint get_branch_point(const json& j) {
    BranchPoint b;
    b.x = get_vec(j.at("x"));
    b.theta = get_param(j.at("theta"));
    b.s = get_num(j.at("s"));
    b.spectrum = get_spectrum(j.at("spectrum"));
    b.stability = get_stab(j.at("stability"));
    return b;
}

json fold_point(const FoldPoint& p) {
    return json{{"x", vec(p.x)},
                {"theta", param(p.theta)},
                {"q", vec(p.nullpair.q)},
                {"p", vec(p.nullpair.p)},
                {"pq", num(p.nullpair.pq)},
                {"bt_flag", p.nullpair.bt_flag},
                {"p_unit", vec(p.p_unit)},
                {"a", num(p.a_coeff)},
                {"orientation", p.orientation},
                {"psi_cusp", num(p.psi_cusp)},
                {"psi_bt", num(p.psi_bt)},
                {"psi_fh", num(p.psi_fh)},
                {"arclength", num(p.arclength)}};
}

FoldPoint get_fold_point(const json& j) {
    FoldPoint p;
    p.x = get_vec(j.at("x"));
    p.theta = get_param(j.at("theta"));
    p.nullpair.q = get_vec(j.at("q"));
    p.nullpair.p = get_vec(j.at("p"));
    p.nullpair.pq = get_num(j.at("pq"));
    p.nullpair.bt_flag = j.at("bt_flag").get<bool>();
    p.p_unit = get_vec(j.at("p_unit"));
    p.a_coeff = get_num(j.at("a"));
    p.orientation = j.at("orientation").get<int>();
    p.psi_cusp = get_num(j.at("psi_cusp"));
    p.psi_bt = get_num(j.at("psi_bt"));
    p.psi_fh = get_num(j.at("psi_fh"));
    p.arclength = get_num(j.at("arclength"));
    return p;
}

json codim2(const Codim2Point& c) {
    json j{{"kind", to_string(c.kind)},
           {"x", vec(c.x)},
           {"theta", param(c.theta)},
           {"q", vec(c.q)},
           {"a", num(c.a_coeff)},
           {"c", num(c.c_coeff)},
           {"pq", num(c.pq)},
           {"pair_real", num(c.pair_real)},
           {"pair_imag", num(c.pair_imag)},
           {"residual", num(c.residual)},
           {"frame", nullptr},
           {"arclength", num(c.arclength)},
           {"classified_by", c.classified_by},
           {"conflict", c.conflict}};
    if (c.frame) {
        const Mat2& m = *c.frame;
        j["frame"] = json::array({json::array({num(m(0, 0)), num(m(0, 1))}), json::array({num(m(1, 0)), num(m(1, 1))})});
    }
    return j;
}

Codim2Point get_codim2(const json& j) {
    Codim2Point c;
    c.kind = codim2_kind_from_string(j.at("kind").get<std::string>());
    c.x = get_vec(j.at("x"));
    c.theta = get_param(j.at("theta"));
    c.q = get_vec(j.at("q"));
    c.a_coeff = get_num(j.at("a"));
    c.c_coeff = get_num(j.at("c"));
    c.pq = get_num(j.at("pq"));
    c.pair_real = get_num(j.at("pair_real"));
    c.pair_imag = get_num(j.at("pair_imag"));
    c.residual = get_num(j.at("residual"));
    if (!j.at("frame").is_null()) {
        const auto& fr = j.at("frame");
        Mat2 m;
        m << get_num(fr.at(0).at(0)), get_num(fr.at(0).at(1)), get_num(fr.at(1).at(0)), get_num(fr.at(1).at(1));
        c.frame = m;
    }
    c.arclength = get_num(j.at("arclength"));
    c.classified_by = j.at("classified_by").get<std::string>();
    c.conflict = j.at("conflict").get<bool>();
    return c;
}

template <class T, class F>
json list(const std::vector<T>& v, F&& f) {
    json a = json::array();
    for (const auto& e : v) a.push_back(f(e));
    return a;
}

template <class T, class F>
std::vector<T> get_list(const json& j, F&& f) {
    std::vector<T> out;
    for (const auto& e : j) out.push_back(f(e));
    return out;
}

json optional_edge(const std::optional<Edge>& e) { return e ? json(to_string(*e)) : json(nullptr); }
std::optional<Edge> get_optional_edge(const json& j) {
    if (j.is_null()) return std::nullopt;
    return edge_from_string(j.get<std::string>());
}

json curve(const FoldCurveRecord& c) {
    return json{{"id", c.id},
                {"closed", c.closed},
                {"start_edge", optional_edge(c.start_edge)},
                {"end_edge", optional_edge(c.end_edge)},
                {"arclength", num(c.arclength)},
                {"codim2", list(c.codim2_points, codim2)},
                {"notes", c.notes},
                {"points", list(c.points, fold_point)}};
}

FoldCurveRecord get_curve(const json& j) {
    FoldCurveRecord c;
    c.id = j.at("id").get<int>();
    c.closed = j.at("closed").get<bool>();
    c.start_edge = get_optional_edge(j.at("start_edge"));
    c.end_edge = get_optional_edge(j.at("end_edge"));
    c.arclength = get_num(j.at("arclength"));
    c.codim2_points = get_list<Codim2Point>(j.at("codim2"), get_codim2);
    c.notes = j.at("notes").get<std::vector<std::string>>();
    c.points = get_list<FoldPoint>(j.at("points"), get_fold_point);
    return c;
}

json branch(const Branch& b) {
    return json{{"points", list(b.points, branch_point)},
                {"folds", list(b.folds, [](const FoldEvent& e) {
                     return json{{"s", num(e.s)}, {"fold", fold_point(e.fold)}};
                 })},
                {"hopfs", list(b.hopfs, [](const HopfEvent& e) {
                     return json{{"x", vec(e.x)}, {"theta", param(e.theta)}, {"s", num(e.s)}};
                 })}};
}

Branch get_branch(const json& j) {
    Branch b;
    b.points = get_list<BranchPoint>(j.at("points"), get_branch_point);
    b.folds = get_list<FoldEvent>(j.at("folds"), [](const json& e) {
        return FoldEvent{get_fold_point(e.at("fold")), get_num(e.at("s"))};
    });
    b.hopfs = get_list<HopfEvent>(j.at("hopfs"), [](const json& e) {
        return HopfEvent{get_vec(e.at("x")), get_param(e.at("theta")), get_num(e.at("s"))};
    });
    return b;
}

json sz_report(const SZReport& sz) {
    json j{{"edge_branch", branch(sz.edge_branch)},
           {"folds", list(sz.folds, fold_point)},
           {"components", list(sz.components, [](const BoundaryArc& a) {
                return json{{"stability", stab(a.stability)}, {"points", list(a.points, branch_point)}};
            })},
           {"opposed", sz.opposed},
           {"opposed_method", to_string(sz.opposed_method)},
           {"opposed_by_flow", sz.opposed_by_flow ? json(*sz.opposed_by_flow) : json(nullptr)},
           {"other_edges_clean", sz.other_edges_clean},
           {"edges", list(sz.edges, [](const EdgeScan& e) {
                return json{{"edge", to_string(e.edge)}, {"branches", list(e.branches, branch)}};
            })}};
    return j;
}

SZReport get_sz_report(const json& j) {
    SZReport sz;
    sz.edge_branch = get_branch(j.at("edge_branch"));
    sz.folds = get_list<FoldPoint>(j.at("folds"), get_fold_point);
    sz.components = get_list<BoundaryArc>(j.at("components"), [](const json& a) {
        return BoundaryArc{get_stab(a.at("stability")), get_list<BranchPoint>(a.at("points"), get_branch_point)};
    });
    sz.opposed = j.at("opposed").get<bool>();
    sz.opposed_method = opposed_method_from_string(j.at("opposed_method").get<std::string>());
    if (!j.at("opposed_by_flow").is_null()) sz.opposed_by_flow = j.at("opposed_by_flow").get<bool>();
    sz.other_edges_clean = j.at("other_edges_clean").get<bool>();
    sz.edges = get_list<EdgeScan>(j.at("edges"), [](const json& e) {
        return EdgeScan{edge_from_string(e.at("edge").get<std::string>()), get_list<Branch>(e.at("branches"), get_branch)};
    });
    return sz;
}

json membership(const MembershipEvidence& m) {
    return json{{"curve_id", m.curve_id},
                {"member", m.member},
                {"fold_index", m.fold_index},
                {"witness", list(m.witness, [](const std::pair<Vec, Param>& w) {
                     return json{{"x", vec(w.first)}, {"theta", param(w.second)}};
                 })},
                {"resolution", m.resolution},
                {"note", m.note}};
}

MembershipEvidence get_membership(const json& j) {
    MembershipEvidence m;
    m.curve_id = j.at("curve_id").get<int>();
    m.member = j.at("member").get<bool>();
    m.fold_index = j.at("fold_index").get<int>();
    m.witness = get_list<std::pair<Vec, Param>>(j.at("witness"), [](const json& w) {
        return std::make_pair(get_vec(w.at("x")), get_param(w.at("theta")));
    });
    m.resolution = j.at("resolution").get<int>();
    m.note = j.at("note").get<std::string>();
    return m;
}

template <class T>
json opt(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> get_opt(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<T>();
}

json verdict(const ParityVerdict& v) {
    return json{{"theorem_satisfied", v.theorem_satisfied},
                {"fh_found", v.fh_found},
                {"fh_points", list(v.fh_points, codim2)},
                {"member_ids", v.member_ids},
                {"cusp_count_total", v.cusp_count_total},
                {"bt_count", v.bt_count},
                {"parity", to_string(v.parity)},
                {"main_curve_id", opt(v.main_curve_id)},
                {"switch_count", opt(v.switch_count)},
                {"closure_discontinuity", opt(v.closure_discontinuity)},
                {"scan_grid", v.scan_grid},
                {"membership_grid", v.membership_grid},
                {"membership", list(v.membership, membership)},
                {"notes", v.notes}};
}

ParityVerdict get_verdict(const json& j) {
    ParityVerdict v;
    v.theorem_satisfied = j.at("theorem_satisfied").get<bool>();
    v.fh_found = j.at("fh_found").get<bool>();
    v.fh_points = get_list<Codim2Point>(j.at("fh_points"), get_codim2);
    v.member_ids = j.at("member_ids").get<std::vector<int>>();
    v.cusp_count_total = j.at("cusp_count_total").get<int>();
    v.bt_count = j.at("bt_count").get<int>();
    const auto p = j.at("parity").get<std::string>();
    if (p != "odd" && p != "even") throw ParseError("report: unknown parity '" + p + "'");
    v.parity = p == "odd" ? Parity::odd : Parity::even;
    v.main_curve_id = get_opt<int>(j.at("main_curve_id"));
    v.switch_count = get_opt<int>(j.at("switch_count"));
    v.closure_discontinuity = get_opt<bool>(j.at("closure_discontinuity"));
    v.scan_grid = j.at("scan_grid").get<int>();
    v.membership_grid = j.at("membership_grid").get<int>();
    v.membership = get_list<MembershipEvidence>(j.at("membership"), get_membership);
    v.notes = j.at("notes").get<std::vector<std::string>>();
    return v;
}

json family(const FamilyDescriptor& d) {
    return json{{"name", d.name},
                {"dim", d.dim},
                {"box", json{{"lo", param(d.box.lo)}, {"hi", param(d.box.hi)}, {"sz_edge", to_string(d.box.sz_edge)}}},
                {"kind", d.kind == FamilyKind::gradient ? "gradient" : "general"},
                {"parameter_linear", d.parameter_linear},
                {"description", d.description},
                {"source", d.source}};
}

FamilyDescriptor get_family(const json& j) {
    FamilyDescriptor d;
    d.name = j.at("name").get<std::string>();
    d.dim = j.at("dim").get<int>();
    const auto& b = j.at("box");
    d.box = ParamBox(get_param(b.at("lo")), get_param(b.at("hi")), edge_from_string(b.at("sz_edge").get<std::string>()));
    const auto k = j.at("kind").get<std::string>();
    if (k != "gradient" && k != "general") throw ParseError("report: unknown family kind '" + k + "'");
    d.kind = k == "gradient" ? FamilyKind::gradient : FamilyKind::general;
    d.parameter_linear = j.at("parameter_linear").get<bool>();
    d.description = j.at("description").get<std::string>();
    d.source = j.at("source").get<std::string>();
    return d;
}

} // namespace

FamilyDescriptor describe(const FamilySpec& f, std::string source) {
    FamilyDescriptor d;
    d.name = f.name;
    d.dim = f.dim;
    d.box = f.box;
    d.kind = f.kind;
    d.parameter_linear = f.dim == 1 && f.linear_form.has_value();
    d.description = f.description;
    d.source = std::move(source);
    return d;
}

FoldCurveRecord decimate_curve(const FoldCurveRecord& c, int max_points) {
    const std::size_t n = c.points.size();
    if (max_points < 2 || n <= std::size_t(max_points)) return c;
    std::set<std::size_t> keep{0, n - 1};
    auto nearest = [&](double s) {
        const auto it = std::lower_bound(c.points.begin(), c.points.end(), s,
                                         [](const FoldPoint& p, double v) { return p.arclength < v; });
        return std::size_t(std::min<std::ptrdiff_t>(it - c.points.begin(), std::ptrdiff_t(n - 1)));
    };
    for (const auto& m : c.codim2_points) {
        const std::size_t i = nearest(m.arclength);
        for (std::size_t k = i > 0 ? i - 1 : 0; k <= std::min(i + 1, n - 1); ++k) keep.insert(k);
    }
    const std::size_t budget = std::size_t(max_points) > keep.size() ? std::size_t(max_points) - keep.size() : 0;
    const double s0 = c.points.front().arclength, s1 = c.points.back().arclength;
    for (std::size_t k = 1; k <= budget && keep.size() < std::size_t(max_points); ++k)
        keep.insert(nearest(s0 + (s1 - s0) * double(k) / double(budget + 1)));
    FoldCurveRecord out = c;
    out.points.clear();
    for (std::size_t i : keep) out.points.push_back(c.points[i]);
    return out;
}

RunReport make_report(const FamilySpec& f, const Settings& s, const PipelineResult& r, std::string source) {
    RunReport rep;
    rep.family = describe(f, std::move(source));
    rep.settings = s;
    rep.sz = r.sz;
    for (const auto& c : r.curves) {
        rep.curves.push_back(decimate_curve(c, s.max_report_points));
        rep.codim2.insert(rep.codim2.end(), c.codim2_points.begin(), c.codim2_points.end());
    }
    rep.verdict = r.verdict;
    rep.scan_grid = r.verdict.scan_grid;
    rep.membership_grid = r.verdict.membership_grid;
    return rep;
}

std::string report_to_string(const RunReport& r) {
    json j;
    j["schema"] = report_schema_name;
    j["version"] = report_schema_version;
    j["family"] = family(r.family);
    j["settings"] = json::parse(settings_to_json(r.settings));
    j["sz"] = r.sz ? sz_report(*r.sz) : json(nullptr);
    j["curves"] = list(r.curves, curve);
    j["codim2"] = list(r.codim2, codim2);
    j["verdict"] = r.verdict ? verdict(*r.verdict) : json(nullptr);
    json t = json::array();
    for (const auto& [stage, sec] : r.timings) t.push_back(json{{"stage", stage}, {"seconds", num(sec)}});
    j["timings"] = t;
    j["resolution"] = json{{"scan_grid", r.scan_grid}, {"membership_grid", r.membership_grid}};
    j["notes"] = r.notes;
    return j.dump(1) + "\n";
}

RunReport report_from_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("report: ") + e.what());
    }
    if (!j.is_object() || !j.contains("schema") || j["schema"] != report_schema_name)
        throw SchemaMismatch("report: not a " + std::string(report_schema_name) + " document");
    const int version = j.value("version", -1);
    if (version != report_schema_version)
        throw SchemaMismatch("report: schema version " + std::to_string(version) + ", expected " +
                             std::to_string(report_schema_version));
    try {
        RunReport r;
        r.family = get_family(j.at("family"));
        r.settings = settings_from_json(j.at("settings").dump());
        if (!j.at("sz").is_null()) r.sz = get_sz_report(j.at("sz"));
        r.curves = get_list<FoldCurveRecord>(j.at("curves"), get_curve);
        r.codim2 = get_list<Codim2Point>(j.at("codim2"), get_codim2);
        if (!j.at("verdict").is_null()) r.verdict = get_verdict(j.at("verdict"));
        for (const auto& t : j.at("timings")) r.timings.emplace_back(t.at("stage").get<std::string>(), get_num(t.at("seconds")));
        r.scan_grid = j.at("resolution").at("scan_grid").get<int>();
        r.membership_grid = j.at("resolution").at("membership_grid").get<int>();
        r.notes = j.at("notes").get<std::vector<std::string>>();
        return r;
    } catch (const json::exception& e) {
        throw ParseError(std::string("report: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("report: ") + e.what());
    }
}

void export_report(const RunReport& r, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("report: cannot write " + path.string());
    out << report_to_string(r);
}

RunReport import_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("report: cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return report_from_string(ss.str());
}

} // namespace cusparity
