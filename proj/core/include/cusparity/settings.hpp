#pragma once

#include <cstdint>
#include <string>

namespace cusparity {

/// Every gate, step size and resolution used by the pipeline. Lengths
/// marked "scaled" are measured after mapping the parameter box onto the
/// unit square and dividing states by the state scale.
struct Settings {
    // classification gates
    double hyp_gate = 1e-8;
    double null_gate = 1e-6;
    double bt_gate = 1e-4;
    double fold_event_gate = 1e-4;
    double cusp_gate = 1e-8;
    double cusp_trigger = 1e-4;
    double hopf_gate = 1e-3;
    double gap_min = 5.0;
    double transport_gate = 0.9;

    // Newton
    double newton_tol = 1e-10;
    int newton_maxit = 50;

    // pseudo-arclength (scaled)
    double h_min = 1e-5;
    double h_max = 0.05;
    double h_init = 0.01;
    double closure_tol = 1e-3;
    double edge_tol = 1e-9;
    double state_cap_factor = 10.0;
    int max_curve_points = 20000;

    // enumeration
    int grid = 40;
    int restarts = 8;
    std::uint64_t seed = 20240611;
    double seed_gate = 0.05;
    double dedup_tol = 1e-3;
    double jump_gate_factor = 10.0;
    /// Half-width of the state region sampled by multi-starts; 0 derives
    /// it from the box.
    double state_radius = 0.0;

    // saddle-component membership
    int member_grid = 60;
    int member_restarts = 10;
    double member_adjacency = 2.5;
    int member_escalations = 1;

    // oracle
    int oracle_points = 200001;
    double oracle_bisection_tol = 1e-12;

    // reports
    int max_report_points = 5000;

    /// Worker threads for seed processing; 0 picks hardware concurrency.
    int threads = 0;

    bool operator==(const Settings&) const = default;
};

/// Overrides fields named in a JSON object; unknown keys raise ParseError.
Settings settings_from_json(const std::string& text, Settings base = {});
Settings load_settings_file(const std::string& path, Settings base = {});
std::string settings_to_json(const Settings& s);

} // namespace cusparity
