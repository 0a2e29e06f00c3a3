#include "cusparity/family_file.hpp"

#include "cusparity/errors.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace cusparity {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

struct Entry {
    std::string value;
    int line = 0;
};

[[noreturn]] void fail_at(int line, const std::string& what) {
    throw ParseError("line " + std::to_string(line) + ": " + what);
}

double parse_double(const Entry& e) {
    try {
        std::size_t used = 0;
        const double v = std::stod(e.value, &used);
        if (trim(std::string_view(e.value).substr(used)).empty()) return v;
    } catch (const std::exception&) {
    }
    fail_at(e.line, "expected a number, got '" + e.value + "'");
}

Param parse_pair(const Entry& e) {
    const auto comma = e.value.find(',');
    if (comma == std::string::npos) fail_at(e.line, "expected two comma-separated numbers");
    return Param(parse_double({trim(e.value.substr(0, comma)), e.line}),
                 parse_double({trim(e.value.substr(comma + 1)), e.line}));
}

Expression parse_expr(const Entry& e, int dim) {
    try {
        return Expression::parse(e.value, dim);
    } catch (const ParseError& err) {
        fail_at(e.line, err.what());
    }
}

} // namespace

FamilySpec parse_family_text(std::string_view text) {
    std::map<std::string, Entry> entries;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (const auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail_at(line_no, "expected 'key = value'");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) fail_at(line_no, "missing key");
        if (value.empty()) fail_at(line_no, "missing value for '" + key + "'");
        const bool known = key == "name" || key == "dim" || key == "kind" || key == "rhs" || key == "potential" ||
                           key == "box_lo" || key == "box_hi" || key == "sz_edge" || key == "fd_step" ||
                           key == "builtin" || (key.rfind("rhs", 0) == 0 && key.size() > 3);
        if (!known) fail_at(line_no, "unknown key '" + key + "'");
        if (entries.contains(key)) fail_at(line_no, "duplicate key '" + key + "'");
        entries[key] = {value, line_no};
    }

    auto get = [&](const std::string& k) -> const Entry* {
        auto it = entries.find(k);
        return it == entries.end() ? nullptr : &it->second;
    };

    FamilySpec fam;
    ParamBox box;
    if (const Entry* b = get("builtin")) {
        try {
            fam = builtin(b->value);
        } catch (const UnknownFamily& err) {
            fail_at(b->line, err.what());
        }
        box = fam.box;
    }
    if (const Entry* e = get("box_lo")) box.lo = parse_pair(*e);
    if (const Entry* e = get("box_hi")) box.hi = parse_pair(*e);
    if (const Entry* e = get("sz_edge")) {
        try {
            box.sz_edge = edge_from_string(e->value);
        } catch (const ParseError& err) {
            fail_at(e->line, err.what());
        }
    }
    if (!(box.lo.x() < box.hi.x() && box.lo.y() < box.hi.y())) {
        const Entry* e = get("box_hi") ? get("box_hi") : get("box_lo");
        fail_at(e ? e->line : 0, "parameter box requires lo < hi componentwise");
    }
    const double fd_step = get("fd_step") ? parse_double(*get("fd_step")) : 1e-5;
    if (!(fd_step > 0.0)) fail_at(get("fd_step")->line, "fd_step must be positive");

    if (get("builtin")) {
        fam.box = box;
        fam.fd_step = fd_step;
        if (const Entry* n = get("name")) fam.name = n->value;
        return fam;
    }

    const Entry* dim_e = get("dim");
    if (!dim_e) fail_at(line_no, "missing 'dim'");
    const double dim_d = parse_double(*dim_e);
    const int dim = static_cast<int>(dim_d);
    if (dim < 1 || dim != dim_d) fail_at(dim_e->line, "dim must be a positive integer");
    const std::string name = get("name") ? get("name")->value : std::string("family");
    const std::string kind = get("kind") ? get("kind")->value : std::string("general");

    if (kind == "gradient") {
        const Entry* pe = get("potential");
        if (!pe) fail_at(line_no, "gradient family needs 'potential'");
        fam = gradient_family_from_expression(name, parse_expr(*pe, dim), box, fd_step);
        fam.description = "gradient of f = " + pe->value;
        return fam;
    }
    if (kind != "general") fail_at(get("kind")->line, "kind must be 'general' or 'gradient'");

    std::vector<Expression> rhs;
    std::string description;
    for (int i = 1; i <= dim; ++i) {
        const Entry* e = get("rhs" + std::to_string(i));
        if (!e && dim == 1) e = get("rhs");
        if (!e) fail_at(line_no, "missing 'rhs" + std::to_string(i) + "'");
        rhs.push_back(parse_expr(*e, dim));
        description += (i > 1 ? "; " : "") + std::string("x") + std::to_string(i) + "' = " + e->value;
    }
    for (const auto& [key, entry] : entries) {
        if (key.rfind("rhs", 0) == 0 && key.size() > 3) {
            const std::string idx = key.substr(3);
            if (idx.find_first_not_of("0123456789") != std::string::npos || std::stoi(idx) > dim)
                fail_at(entry.line, "'" + key + "' does not match dim = " + std::to_string(dim));
        }
    }
    fam = family_from_expressions(name, rhs, box, fd_step);
    fam.description = description;
    return fam;
}

FamilySpec load_family_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open family file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_family_text(ss.str());
}

} // namespace cusparity
