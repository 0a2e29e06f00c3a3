#pragma once

#include "cusparity/family.hpp"
#include "cusparity/settings.hpp"
#include "cusparity/szparity.hpp"
#include "cusparity/types.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cusparity {

inline constexpr int report_schema_version = 1;
inline constexpr const char* report_schema_name = "cusparity-report";

struct FamilyDescriptor {
    std::string name;
    int dim = 1;
    ParamBox box;
    FamilyKind kind = FamilyKind::general;
    bool parameter_linear = false;
    std::string description;
    /// Built-in name or file the family came from.
    std::string source;

    bool operator==(const FamilyDescriptor&) const = default;
};

FamilyDescriptor describe(const FamilySpec& f, std::string source = {});

struct RunReport {
    FamilyDescriptor family;
    Settings settings;
    std::optional<SZReport> sz;
    /// Decimated to at most settings.max_report_points each.
    std::vector<FoldCurveRecord> curves;
    std::vector<Codim2Point> codim2;
    std::optional<ParityVerdict> verdict;
    /// (stage, seconds)
    std::vector<std::pair<std::string, double>> timings;
    int scan_grid = 0;
    int membership_grid = 0;
    std::vector<std::string> notes;
};

/// Keeps the ends, the samples next to each codim-2 marker and an
/// arclength-uniform selection of the rest.
FoldCurveRecord decimate_curve(const FoldCurveRecord& c, int max_points);

/// Fills a report from a pipeline result, decimating the curves.
RunReport make_report(const FamilySpec& f, const Settings& s, const PipelineResult& r, std::string source = {});

std::string report_to_string(const RunReport& r);
/// Throws SchemaMismatch and ParseError.
RunReport report_from_string(const std::string& text);
void export_report(const RunReport& r, const std::filesystem::path& path);
RunReport import_report(const std::filesystem::path& path);

} // namespace cusparity
