#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "magnon/error.hpp"
#include "magnon/lattice.hpp"

namespace magnon::io {

using json = nlohmann::ordered_json;

/// 17 significant digits, enough to round-trip any double.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline void write_json(std::ostream& os, const json& j, int indent, int depth) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(indent * depth), ' ');
    switch (j.type()) {
    case json::value_t::object: {
        if (j.empty()) {
            os << "{}";
            return;
        }
        os << "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) os << ",\n";
            first = false;
            os << pad << json(it.key()).dump() << ": ";
            write_json(os, it.value(), indent, depth + 1);
        }
        os << '\n' << close << '}';
        return;
    }
    case json::value_t::array: {
        if (j.empty()) {
            os << "[]";
            return;
        }
        // numeric arrays stay on one line
        const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
        os << '[';
        bool first = true;
        for (const auto& e : j) {
            if (!first) os << (flat ? ", " : ",");
            first = false;
            if (!flat) os << '\n' << pad;
            write_json(os, e, indent, depth + 1);
        }
        if (!flat) os << '\n' << close;
        os << ']';
        return;
    }
    case json::value_t::number_float: {
        const double v = j.get<double>();
        if (std::isfinite(v)) os << format_double(v);
        else os << "null";
        return;
    }
    default: os << j.dump(); return;
    }
}

} // namespace detail

/// JSON with every float printed at 17 significant digits.
inline void write_json(std::ostream& os, const json& j) {
    detail::write_json(os, j, 2, 0);
    os << '\n';
}

inline std::string join(const std::vector<std::string>& parts, const std::string& sep = ",") {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
    return out;
}

inline void write_config_comment(std::ostream& os, const std::map<std::string, std::string>& cfg) {
    for (const auto& [k, v] : cfg) os << "# " << k << " = " << v << '\n';
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InputError("cannot open output file " + path.string());
    return os;
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(s);
    while (std::getline(is, cell, sep)) out.push_back(trim(cell));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

template <class T>
T parse_number(const std::string& s, const std::string& where) {
    std::istringstream is(s);
    T v{};
    is >> v;
    if (!is || !(is >> std::ws).eof()) throw InputError("cannot parse '" + s + "' in " + where);
    return v;
}

} // namespace detail

/// Coupling table with header dz1,...,dz<dim>,J,J3 and one row per
/// displacement. Missing mirror rows -z are inserted; duplicate or mirrored
/// rows with different values are rejected.
inline CouplingSet read_couplings_csv(std::istream& is, int dim, double h, const std::string& name = "couplings") {
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> header;
    while (std::getline(is, line)) {
        ++lineno;
        line = detail::trim(line);
        if (line.empty() || line[0] == '#') continue;
        header = detail::split(line, ',');
        break;
    }
    std::vector<std::string> expected;
    for (int d = 1; d <= dim; ++d) expected.push_back("dz" + std::to_string(d));
    expected.push_back("J");
    expected.push_back("J3");
    if (header != expected) throw InputError(name + ": header must be '" + join(expected) + "'");

    CouplingSet::Map m;
    while (std::getline(is, line)) {
        ++lineno;
        line = detail::trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto cells = detail::split(line, ',');
        const std::string where = name + ":" + std::to_string(lineno);
        if (cells.size() != expected.size()) throw InputError(where + ": expected " + std::to_string(expected.size()) + " columns");
        IntVec z(dim);
        for (int d = 0; d < dim; ++d) z[d] = detail::parse_number<int>(cells[d], where);
        const CouplingPair c{detail::parse_number<double>(cells[dim], where), detail::parse_number<double>(cells[dim + 1], where)};
        auto [it, inserted] = m.emplace(z, c);
        if (!inserted && !(it->second == c)) throw InputError(where + ": conflicting duplicate row for " + to_string(z));
    }
    return CouplingSet::symmetrized(dim, std::move(m), h);
}

inline CouplingSet load_couplings_csv(const std::filesystem::path& path, int dim, double h) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open coupling file " + path.string());
    return read_couplings_csv(is, dim, h, path.string());
}

} // namespace magnon::io
