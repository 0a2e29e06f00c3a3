#pragma once

#include "cusparity/report.hpp"

#include <string>

namespace cusparity {

struct RenderOptions {
    int size = 560;
    /// Overlay looping and nudging curves at every cusp with a frame.
    bool approximating_curves = false;
    double amplitude = 0.01;
    double span = 0.3;
};

/// Bifurcation diagram of a report as an SVG document. Identical reports
/// give byte-identical output.
std::string render_svg(const RunReport& report, const RenderOptions& options = {});

} // namespace cusparity
