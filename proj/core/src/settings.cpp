#include "cusparity/settings.hpp"

#include "cusparity/errors.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace cusparity {

namespace {

using nlohmann::ordered_json;

template <class F>
void visit_fields(Settings& s, F&& f) {
#define CUSPARITY_FIELD(name) f(#name, s.name)
    CUSPARITY_FIELD(hyp_gate);
    CUSPARITY_FIELD(null_gate);
    CUSPARITY_FIELD(bt_gate);
    CUSPARITY_FIELD(fold_event_gate);
    CUSPARITY_FIELD(cusp_gate);
    CUSPARITY_FIELD(cusp_trigger);
    CUSPARITY_FIELD(hopf_gate);
    CUSPARITY_FIELD(gap_min);
    CUSPARITY_FIELD(transport_gate);
    CUSPARITY_FIELD(newton_tol);
    CUSPARITY_FIELD(newton_maxit);
    CUSPARITY_FIELD(h_min);
    CUSPARITY_FIELD(h_max);
    CUSPARITY_FIELD(h_init);
    CUSPARITY_FIELD(closure_tol);
    CUSPARITY_FIELD(edge_tol);
    CUSPARITY_FIELD(state_cap_factor);
    CUSPARITY_FIELD(max_curve_points);
    CUSPARITY_FIELD(grid);
    CUSPARITY_FIELD(restarts);
    CUSPARITY_FIELD(seed);
    CUSPARITY_FIELD(seed_gate);
    CUSPARITY_FIELD(dedup_tol);
    CUSPARITY_FIELD(jump_gate_factor);
    CUSPARITY_FIELD(state_radius);
    CUSPARITY_FIELD(member_grid);
    CUSPARITY_FIELD(member_restarts);
    CUSPARITY_FIELD(member_adjacency);
    CUSPARITY_FIELD(member_escalations);
    CUSPARITY_FIELD(oracle_points);
    CUSPARITY_FIELD(oracle_bisection_tol);
    CUSPARITY_FIELD(max_report_points);
    CUSPARITY_FIELD(threads);
#undef CUSPARITY_FIELD
}

} // namespace

Settings settings_from_json(const std::string& text, Settings base) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("settings: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("settings: top level must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        visit_fields(base, [&](const char* name, auto& field) {
            if (it.key() != name) return;
            known = true;
            try {
                field = it.value().get<std::decay_t<decltype(field)>>();
            } catch (const nlohmann::json::exception&) {
                throw ParseError("settings: bad value for '" + it.key() + "'");
            }
        });
        if (!known) throw ParseError("settings: unknown key '" + it.key() + "'");
    }
    return base;
}

Settings load_settings_file(const std::string& path, Settings base) {
    std::ifstream in(path);
    if (!in) throw ParseError("settings: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return settings_from_json(ss.str(), base);
}

std::string settings_to_json(const Settings& s) {
    ordered_json j = ordered_json::object();
    Settings copy = s;
    visit_fields(copy, [&](const char* name, auto& field) { j[name] = field; });
    return j.dump(2);
}

} // namespace cusparity
