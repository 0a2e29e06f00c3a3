#include "cusparity/render_svg.hpp"

#include "cusparity/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace cusparity {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", std::abs(v) < 5e-4 ? 0.0 : v);
    return buf;
}

std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Frame {
    double x0, y0, w, h;
    double lo_u, hi_u, lo_v, hi_v;

    double px(double u) const { return x0 + w * (u - lo_u) / (hi_u - lo_u); }
    double py(double v) const { return y0 + h * (1.0 - (v - lo_v) / (hi_v - lo_v)); }
};

std::string stability_color(const StabilityClass& c) {
    if (c.kind == Stability::attractor) return "#1f5fa8";
    if (c.kind == Stability::saddle) return "#d9801a";
    return "#000000";
}

void polyline(std::ostringstream& o, const Frame& fr, const ParamPolyline& pts, const std::string& style) {
    if (pts.empty()) return;
    o << "<polyline fill=\"none\" " << style << " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i)
        o << (i ? " " : "") << fmt(fr.px(pts[i][0])) << "," << fmt(fr.py(pts[i][1]));
    o << "\"/>\n";
}

void glyph(std::ostringstream& o, const Frame& fr, const Codim2Point& c) {
    const double x = fr.px(c.theta[0]), y = fr.py(c.theta[1]), r = 6.0;
    switch (c.kind) {
    case Codim2Kind::cusp_standard:
    case Codim2Kind::cusp_dual:
        o << "<polygon class=\"" << to_string(c.kind) << "\" points=\"" << fmt(x) << "," << fmt(y - r) << " "
          << fmt(x - r) << "," << fmt(y + r) << " " << fmt(x + r) << "," << fmt(y + r) << "\" "
          << (c.kind == Codim2Kind::cusp_standard ? "fill=\"#b01c2e\"" : "fill=\"white\"")
          << " stroke=\"#b01c2e\" stroke-width=\"1.5\"/>\n";
        break;
    case Codim2Kind::bogdanov_takens:
        o << "<polygon class=\"bogdanov_takens\" points=\"" << fmt(x) << "," << fmt(y - r) << " " << fmt(x + r)
          << "," << fmt(y) << " " << fmt(x) << "," << fmt(y + r) << " " << fmt(x - r) << "," << fmt(y)
          << "\" fill=\"#2a8a3e\"/>\n";
        break;
    case Codim2Kind::fold_hopf:
        o << "<circle class=\"fold_hopf\" cx=\"" << fmt(x) << "\" cy=\"" << fmt(y) << "\" r=\"" << fmt(r)
          << "\" fill=\"#7b3fa0\"/>\n";
        break;
    }
}

// Boundary coordinate along the S/Z edge and the first state component.
void inset(std::ostringstream& o, const SZReport& sz, Edge edge, double x0, double y0, double side) {
    const auto& pts = sz.edge_branch.points;
    if (pts.empty()) return;
    double lo_s = pts.front().s, hi_s = lo_s, lo_x = pts.front().x[0], hi_x = lo_x;
    for (const auto& p : pts) {
        lo_s = std::min(lo_s, p.s);
        hi_s = std::max(hi_s, p.s);
        lo_x = std::min(lo_x, p.x[0]);
        hi_x = std::max(hi_x, p.x[0]);
    }
    if (hi_s - lo_s < 1e-12) hi_s = lo_s + 1.0;
    const double pad = 0.05 * std::max(hi_x - lo_x, 1e-6);
    const Frame fr{x0, y0, side, side, lo_s, hi_s, lo_x - pad, hi_x + pad};
    o << "<g class=\"inset\">\n";
    o << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y0) << "\" width=\"" << fmt(side) << "\" height=\"" << fmt(side)
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
    o << "<text x=\"" << fmt(x0 + side / 2) << "\" y=\"" << fmt(y0 - 8) << "\" text-anchor=\"middle\" font-size=\"12\">"
      << "x along the " << to_string(edge) << " edge</text>\n";
    for (std::size_t i = 1; i < pts.size(); ++i) {
        o << "<line x1=\"" << fmt(fr.px(pts[i - 1].s)) << "\" y1=\"" << fmt(fr.py(pts[i - 1].x[0])) << "\" x2=\""
          << fmt(fr.px(pts[i].s)) << "\" y2=\"" << fmt(fr.py(pts[i].x[0])) << "\" stroke=\""
          << stability_color(pts[i].stability) << "\" stroke-width=\"2\"/>\n";
    }
    for (const auto& e : sz.edge_branch.folds)
        o << "<rect class=\"boundary_fold\" x=\"" << fmt(fr.px(e.s) - 3) << "\" y=\"" << fmt(fr.py(e.fold.x[0]) - 3)
          << "\" width=\"6\" height=\"6\" fill=\"#000\"/>\n";
    o << "</g>\n";
}

} // namespace

std::string render_svg(const RunReport& report, const RenderOptions& opt) {
    const double margin = 50.0, side = opt.size;
    const bool with_inset = report.family.dim == 1 && report.sz && !report.sz->edge_branch.points.empty();
    const double inset_side = 0.5 * side;
    const double width = 2 * margin + side + (with_inset ? inset_side + margin : 0.0);
    const double height = 2 * margin + side;
    const ParamBox& box = report.family.box;
    const Frame fr{margin, margin, side, side, box.lo[0], box.hi[0], box.lo[1], box.hi[1]};

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\"" << fmt(height)
      << "\" viewBox=\"0 0 " << fmt(width) << " " << fmt(height) << "\" font-family=\"sans-serif\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    std::string title = report.family.name;
    if (report.verdict) {
        const auto& v = *report.verdict;
        title += ": cusps " + std::to_string(v.cusp_count_total) + ", " + std::string(to_string(v.parity)) +
                 (v.fh_found ? ", fold-Hopf found" : "") + (v.theorem_satisfied ? ", satisfied" : ", not satisfied");
    }
    o << "<text x=\"" << fmt(margin) << "\" y=\"" << fmt(margin - 20) << "\" font-size=\"14\">" << esc(title)
      << "</text>\n";

    // parameter box with the S/Z edge drawn heavy
    o << "<rect class=\"box\" x=\"" << fmt(margin) << "\" y=\"" << fmt(margin) << "\" width=\"" << fmt(side)
      << "\" height=\"" << fmt(side) << "\" fill=\"none\" stroke=\"#444\"/>\n";
    const auto seg = box.edge_segment(box.sz_edge);
    o << "<line class=\"sz_edge\" x1=\"" << fmt(fr.px(seg[0][0])) << "\" y1=\"" << fmt(fr.py(seg[0][1])) << "\" x2=\""
      << fmt(fr.px(seg[1][0])) << "\" y2=\"" << fmt(fr.py(seg[1][1])) << "\" stroke=\"#444\" stroke-width=\"4\"/>\n";
    o << "<text x=\"" << fmt(margin + side / 2) << "\" y=\"" << fmt(margin + side + 32)
      << "\" text-anchor=\"middle\" font-size=\"12\">theta1 [" << fmt(box.lo[0]) << ", " << fmt(box.hi[0])
      << "]</text>\n";
    o << "<text x=\"" << fmt(margin - 32) << "\" y=\"" << fmt(margin + side / 2)
      << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 " << fmt(margin - 32) << " "
      << fmt(margin + side / 2) << ")\">theta2 [" << fmt(box.lo[1]) << ", " << fmt(box.hi[1]) << "]</text>\n";

    std::vector<int> members;
    if (report.verdict) members = report.verdict->member_ids;
    for (const auto& c : report.curves) {
        const bool member = std::find(members.begin(), members.end(), c.id) != members.end();
        const std::string style = member ? "class=\"curve member\" stroke=\"#b01c2e\" stroke-width=\"2.5\""
                                         : "class=\"curve\" stroke=\"#777\" stroke-width=\"1.5\" stroke-dasharray=\"5,3\"";
        polyline(o, fr, c.parameters(), style);
    }

    if (opt.approximating_curves)
        for (const auto& m : report.codim2) {
            if (m.kind != Codim2Kind::cusp_standard && m.kind != Codim2Kind::cusp_dual) continue;
            if (!m.frame) continue;
            polyline(o, fr, approximating_curve(m, opt.amplitude, opt.span),
                     "class=\"looping\" stroke=\"#e03030\" stroke-width=\"1\"");
            polyline(o, fr, approximating_curve(m, -opt.amplitude, opt.span),
                     "class=\"nudging\" stroke=\"#3050e0\" stroke-width=\"1\"");
        }

    if (report.sz)
        for (const auto& p : report.sz->folds)
            o << "<rect class=\"boundary_fold\" x=\"" << fmt(fr.px(p.theta[0]) - 4) << "\" y=\""
              << fmt(fr.py(p.theta[1]) - 4) << "\" width=\"8\" height=\"8\" fill=\"#000\"/>\n";
    for (const auto& m : report.codim2) glyph(o, fr, m);

    if (with_inset) inset(o, *report.sz, box.sz_edge, 2 * margin + side, margin + 0.25 * side, inset_side);
    o << "</svg>\n";
    return o.str();
}

} // namespace cusparity
