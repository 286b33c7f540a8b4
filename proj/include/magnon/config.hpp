#pragma once

// Run configuration: flat "key = value" lines with dotted section names.
// '#' starts a comment. Unknown keys are rejected; every key has a documented
// default or is required, and the resolved set is what artifacts embed.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "magnon/error.hpp"
#include "magnon/io.hpp"
#include "magnon/lattice.hpp"

namespace magnon {

struct RunConfig {
    int dim = 1;
    int linear_size = 0;
    std::filesystem::path couplings_path;
    double beta = 1.0;
    double h = 0.0;

    double validate_tol = 1e-12;

    double solve_tol = 1e-12;
    int scan_points = 4096;

    std::vector<int> oracle_copies{1, 3, 5, 7};
    IntVec oracle_q;  ///< grid label n, k = 2 pi n / L
    std::vector<int> oracle_crosscheck;
    std::size_t oracle_max_block_dim = 10000;
    std::size_t oracle_max_full_dim = 4096;
    double oracle_monotone_tol = 0.0;

    std::optional<double> dynamics_m;
    std::string dynamics_initial = "equilibrium";
    std::vector<double> dynamics_times;
    std::vector<double> packet_center;
    double packet_width = 1.0;
    std::vector<double> packet_k;
    double packet_number = 1.0;
    double dynamics_check_tol = 1e-10;

    int sectors_n = 7;

    /// Effective configuration, defaults resolved, keyed by dotted name.
    std::map<std::string, std::string> effective;

    LatticeSpec lattice() const { return LatticeSpec(dim, linear_size); }
    CouplingSet couplings() const { return io::load_couplings_csv(couplings_path, dim, h); }
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    if (io::detail::trim(v).empty()) return out;
    for (auto& s : io::detail::split(v, ',')) {
        if (s.empty()) throw InputError("empty element in list '" + v + "'");
        out.push_back(s);
    }
    return out;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& v) {
    std::vector<T> out;
    for (const auto& s : split_list(v)) out.push_back(io::detail::parse_number<T>(s, key));
    return out;
}

} // namespace detail

inline RunConfig parse_run_config(std::istream& is, const std::filesystem::path& base_dir = ".") {
    static const std::map<std::string, std::string> defaults = {
        {"lattice.dim", "1"},
        {"lattice.L", ""},
        {"couplings.path", ""},
        {"thermal.beta", "1"},
        {"thermal.h", ""},
        {"validate.tol", "1e-12"},
        {"solve.tol", "1e-12"},
        {"solve.scan_points", "4096"},
        {"oracle.n", "1,3,5,7"},
        {"oracle.q", ""},
        {"oracle.crosscheck", ""},
        {"oracle.max_block_dim", "10000"},
        {"oracle.max_full_dim", "4096"},
        {"oracle.monotone_tol", "0"},
        {"dynamics.m", ""},
        {"dynamics.initial", "equilibrium"},
        {"dynamics.times", ""},
        {"dynamics.packet.center", ""},
        {"dynamics.packet.width", "1"},
        {"dynamics.packet.k", ""},
        {"dynamics.packet.number", "1"},
        {"dynamics.check_tol", "1e-10"},
        {"sectors.n", "7"},
    };

    std::map<std::string, std::string> given;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = io::detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = "config line " + std::to_string(lineno);
        if (eq == std::string::npos) throw InputError(where + ": expected 'key = value'");
        const std::string key = io::detail::trim(line.substr(0, eq));
        const std::string value = io::detail::trim(line.substr(eq + 1));
        if (!defaults.contains(key)) throw InputError(where + ": unknown key '" + key + "'");
        if (!given.emplace(key, value).second) throw InputError(where + ": duplicate key '" + key + "'");
    }

    auto raw = [&](const std::string& key) -> std::string {
        auto it = given.find(key);
        return it != given.end() ? it->second : defaults.at(key);
    };
    auto required = [&](const std::string& key) {
        const std::string v = raw(key);
        if (v.empty()) throw InputError("missing required key '" + key + "'");
        return v;
    };
    auto number = [&](const std::string& key) { return io::detail::parse_number<double>(required(key), key); };
    auto integer = [&](const std::string& key) { return io::detail::parse_number<long long>(required(key), key); };
    auto check = [](bool ok, const std::string& key, const std::string& rule) {
        if (!ok) throw InputError("'" + key + "' must be " + rule);
    };

    RunConfig c;
    const auto dim = integer("lattice.dim");
    check(dim >= 1 && dim <= 3, "lattice.dim", "in [1, 3]");
    c.dim = static_cast<int>(dim);
    const auto L = integer("lattice.L");
    check(L >= 1 && L <= 4096, "lattice.L", "in [1, 4096]");
    c.linear_size = static_cast<int>(L);

    c.couplings_path = std::filesystem::path(required("couplings.path"));
    if (c.couplings_path.is_relative()) c.couplings_path = base_dir / c.couplings_path;
    if (!std::filesystem::is_regular_file(c.couplings_path))
        throw InputError("coupling file not found: " + c.couplings_path.string());

    c.beta = number("thermal.beta");
    check(std::isfinite(c.beta) && c.beta > 0.0, "thermal.beta", "finite and > 0");
    c.h = number("thermal.h");
    check(std::isfinite(c.h) && c.h >= 0.0, "thermal.h", "finite and >= 0");

    c.validate_tol = number("validate.tol");
    check(c.validate_tol >= 0.0, "validate.tol", ">= 0");
    c.solve_tol = number("solve.tol");
    check(c.solve_tol > 0.0, "solve.tol", "> 0");
    const auto scan = integer("solve.scan_points");
    check(scan >= 2 && scan <= 100000000, "solve.scan_points", "in [2, 1e8]");
    c.scan_points = static_cast<int>(scan);

    c.oracle_copies = detail::parse_list<int>("oracle.n", raw("oracle.n"));
    check(!c.oracle_copies.empty(), "oracle.n", "a non-empty list");
    for (int n : c.oracle_copies) check(n >= 1 && n % 2 == 1 && n <= 31, "oracle.n", "odd values in [1, 31]");
    c.oracle_q = detail::parse_list<int>("oracle.q", raw("oracle.q"));
    if (c.oracle_q.empty()) c.oracle_q.assign(c.dim, 0);
    check(static_cast<int>(c.oracle_q.size()) == c.dim, "oracle.q", "an integer vector of length lattice.dim");
    c.oracle_crosscheck = detail::parse_list<int>("oracle.crosscheck", raw("oracle.crosscheck"));
    const auto block_cap = integer("oracle.max_block_dim");
    check(block_cap >= 1, "oracle.max_block_dim", ">= 1");
    c.oracle_max_block_dim = static_cast<std::size_t>(block_cap);
    const auto full_cap = integer("oracle.max_full_dim");
    check(full_cap >= 1 && full_cap <= 4096, "oracle.max_full_dim", "in [1, 4096]");
    c.oracle_max_full_dim = static_cast<std::size_t>(full_cap);
    c.oracle_monotone_tol = number("oracle.monotone_tol");
    check(c.oracle_monotone_tol >= 0.0, "oracle.monotone_tol", ">= 0");

    if (!raw("dynamics.m").empty()) {
        const double m = number("dynamics.m");
        check(m >= -1.0 && m <= 0.0, "dynamics.m", "in [-1, 0]");
        c.dynamics_m = m;
    }
    c.dynamics_initial = raw("dynamics.initial");
    check(c.dynamics_initial == "equilibrium" || c.dynamics_initial == "packet", "dynamics.initial",
          "'equilibrium' or 'packet'");
    c.dynamics_times = detail::parse_list<double>("dynamics.times", raw("dynamics.times"));
    for (double t : c.dynamics_times) check(std::isfinite(t), "dynamics.times", "finite");
    c.packet_center = detail::parse_list<double>("dynamics.packet.center", raw("dynamics.packet.center"));
    if (c.packet_center.empty()) c.packet_center.assign(c.dim, 0.0);
    check(static_cast<int>(c.packet_center.size()) == c.dim, "dynamics.packet.center", "a vector of length lattice.dim");
    c.packet_width = number("dynamics.packet.width");
    check(c.packet_width > 0.0, "dynamics.packet.width", "> 0");
    c.packet_k = detail::parse_list<double>("dynamics.packet.k", raw("dynamics.packet.k"));
    if (c.packet_k.empty()) c.packet_k.assign(c.dim, 0.0);
    check(static_cast<int>(c.packet_k.size()) == c.dim, "dynamics.packet.k", "a vector of length lattice.dim");
    c.packet_number = number("dynamics.packet.number");
    check(c.packet_number >= 0.0, "dynamics.packet.number", ">= 0");
    c.dynamics_check_tol = number("dynamics.check_tol");
    check(c.dynamics_check_tol > 0.0, "dynamics.check_tol", "> 0");

    const auto sn = integer("sectors.n");
    check(sn >= 1 && sn % 2 == 1 && sn <= 31, "sectors.n", "odd and in [1, 31]");
    c.sectors_n = static_cast<int>(sn);

    for (const auto& [key, def] : defaults) c.effective[key] = raw(key);
    c.effective["couplings.path"] = given.at("couplings.path");
    auto list = [](const auto& values) {
        std::vector<std::string> s;
        for (const auto& v : values) {
            std::ostringstream os;
            os.precision(17);
            os << v;
            s.push_back(os.str());
        }
        return io::join(s);
    };
    c.effective["oracle.q"] = list(c.oracle_q);
    c.effective["dynamics.packet.center"] = list(c.packet_center);
    c.effective["dynamics.packet.k"] = list(c.packet_k);
    return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open config file " + path.string());
    return parse_run_config(is, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

} // namespace magnon
