#pragma once

// Subcommand bodies for the magnon CLI. Each returns the process exit code:
// 0 success, 1 scientific-condition failure. Input problems surface as
// InputError (exit 2) and regime failures inside solvers as RegimeError
// (exit 1); the caller maps them.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "magnon/config.hpp"
#include "magnon/convergence.hpp"
#include "magnon/dynamics.hpp"
#include "magnon/io.hpp"
#include "magnon/lattice.hpp"
#include "magnon/sectors.hpp"
#include "magnon/spinwave.hpp"

namespace magnon::cli {

enum class Format { Json, Csv };

struct OutputOptions {
    std::filesystem::path dir = ".";
    Format format = Format::Json;
    int threads = 1;
    std::ostream* log = &std::cout;
};

namespace detail {

using io::format_double;
using io::json;

inline json config_json(const RunConfig& c) {
    json j = json::object();
    for (const auto& [k, v] : c.effective) j[k] = v;
    return j;
}

inline std::filesystem::path artifact(const OutputOptions& out, const std::string& stem) {
    return out.dir / (stem + (out.format == Format::Json ? ".json" : ".csv"));
}

inline std::vector<std::string> axis_names(const std::string& prefix, int dim) {
    std::vector<std::string> v;
    for (int d = 1; d <= dim; ++d) v.push_back(prefix + std::to_string(d));
    return v;
}

inline std::vector<std::string> momentum_cells(const MomentumGrid& grid, std::size_t q) {
    std::vector<std::string> v;
    for (int n : grid.label(q)) v.push_back(std::to_string(n));
    for (double k : grid[q]) v.push_back(format_double(k));
    return v;
}

} // namespace detail

inline int cmd_validate(const RunConfig& cfg, const OutputOptions& out) {
    using namespace detail;
    const CouplingSet c = cfg.couplings();
    const MomentumGrid grid(cfg.lattice());
    const ValidationReport r = validate_ferromagnetic(c, grid, cfg.validate_tol);

    auto os = io::open_output(artifact(out, "validate"));
    if (out.format == Format::Json) {
        json j;
        j["config"] = config_json(cfg);
        j["d0"] = r.d0;
        j["min_d"] = r.min_d;
        j["argmin_n"] = grid.label(r.argmin);
        j["argmin_k"] = r.argmin_momentum;
        j["field"] = r.field;
        j["gap_ok"] = r.gap_ok;
        j["field_ok_strict"] = r.field_ok_strict;
        j["field_ok_relaxed"] = r.field_ok_relaxed;
        j["messages"] = r.messages;
        j["d_of_q"] = r.d_values;
        io::write_json(os, j);
    } else {
        io::write_config_comment(os, cfg.effective);
        auto cols = axis_names("n", cfg.dim);
        for (auto& k : axis_names("k", cfg.dim)) cols.push_back(k);
        cols.push_back("D");
        os << io::join(cols) << '\n';
        for (std::size_t q = 0; q < grid.size(); ++q) {
            auto cells = momentum_cells(grid, q);
            cells.push_back(format_double(r.d_values[q]));
            os << io::join(cells) << '\n';
        }
    }

    auto& log = *out.log;
    log << "gap_ok=" << r.gap_ok << " field_ok_relaxed=" << r.field_ok_relaxed
        << " field_ok_strict=" << r.field_ok_strict << '\n';
    for (const auto& m : r.messages) log << "  " << m << '\n';
    return r.ferromagnetic() ? 0 : 1;
}

inline int cmd_solve(const RunConfig& cfg, const OutputOptions& out) {
    using namespace detail;
    const CouplingSet c = cfg.couplings();
    const MomentumGrid grid(cfg.lattice());
    const ThermalParams p(cfg.beta, cfg.h);
    const SpinWaveSolution s = solve_magnetization(p, c, grid, {cfg.solve_tol, cfg.scan_points});

    auto os = io::open_output(artifact(out, "solve"));
    if (out.format == Format::Json) {
        json j;
        j["config"] = config_json(cfg);
        j["m_star"] = s.m_star;
        j["residual"] = s.residual;
        j["bound"] = s.bound;
        if (s.bound_detail.symbol_variant) j["bound_d0"] = *s.bound_detail.symbol_variant;
        if (s.bound_detail.asymptote) j["bound_asymptote"] = *s.bound_detail.asymptote;
        j["roots"] = s.all_roots;
        j["multiple_roots"] = s.multiple_roots;
        j["d_of_q"] = s.symbols;
        j["n_of_q"] = s.occupations;
        j["eps_of_q"] = s.dispersion;
        io::write_json(os, j);
    } else {
        io::write_config_comment(os, cfg.effective);
        os << "# m_star = " << format_double(s.m_star) << '\n';
        os << "# residual = " << format_double(s.residual) << '\n';
        os << "# bound = " << format_double(s.bound) << '\n';
        auto cols = axis_names("n", cfg.dim);
        for (auto& k : axis_names("k", cfg.dim)) cols.push_back(k);
        for (const char* k : {"D", "n_of_q", "eps_of_q"}) cols.emplace_back(k);
        os << io::join(cols) << '\n';
        for (std::size_t q = 0; q < grid.size(); ++q) {
            auto cells = momentum_cells(grid, q);
            cells.push_back(format_double(s.symbols[q]));
            cells.push_back(format_double(s.occupations[q]));
            cells.push_back(format_double(s.dispersion[q]));
            os << io::join(cells) << '\n';
        }
    }
    *out.log << "m_star=" << format_double(s.m_star) << " residual=" << format_double(s.residual)
             << " roots=" << s.all_roots.size() << '\n';
    return 0;
}

inline int cmd_oracle(const RunConfig& cfg, const OutputOptions& out) {
    using namespace detail;
    const CouplingSet c = cfg.couplings();
    const LatticeSpec lattice = cfg.lattice();
    const MomentumGrid grid(lattice);
    const Momentum q = grid[grid.index_of(cfg.oracle_q)];

    ConvergenceOptions opt;
    opt.copies = cfg.oracle_copies;
    opt.crosscheck_copies = cfg.oracle_crosscheck;
    opt.limits.max_block_dim = cfg.oracle_max_block_dim;
    opt.limits.max_full_dim = cfg.oracle_max_full_dim;
    opt.limits.threads = out.threads;
    const auto rows = convergence_study(lattice, c, cfg.beta, q, opt);

    const bool monotone = strictly_decreasing_discrepancy(rows, cfg.oracle_monotone_tol);
    bool crosscheck_ok = true;
    for (const auto& r : rows)
        if (r.crosscheck && !(*r.crosscheck <= 1e-10)) crosscheck_ok = false;

    auto os = io::open_output(artifact(out, "oracle"));
    if (out.format == Format::Json) {
        json j;
        j["config"] = config_json(cfg);
        j["q"] = q;
        json table = json::array();
        for (const auto& r : rows) {
            json row;
            row["n"] = r.copies;
            row["m_n"] = r.magnetization;
            row["t_n"] = r.two_point;
            row["p_n"] = r.prediction;
            row["discrepancy"] = r.discrepancy;
            row["wick_residual"] = r.wick;
            if (r.crosscheck) row["full_tensor_deviation"] = *r.crosscheck;
            table.push_back(row);
        }
        j["rows"] = table;
        j["strictly_decreasing"] = monotone;
        io::write_json(os, j);
    } else {
        io::write_config_comment(os, cfg.effective);
        os << "n,m_n,t_n,p_n,discrepancy\n";
        for (const auto& r : rows)
            os << r.copies << ',' << format_double(r.magnetization) << ',' << format_double(r.two_point) << ','
               << format_double(r.prediction) << ',' << format_double(r.discrepancy) << '\n';
    }

    auto& log = *out.log;
    for (const auto& r : rows) {
        log << "n=" << r.copies << " m_n=" << format_double(r.magnetization)
            << " discrepancy=" << format_double(r.discrepancy);
        if (r.crosscheck) log << " full_tensor_deviation=" << format_double(*r.crosscheck);
        log << '\n';
    }
    log << "strictly_decreasing=" << monotone << '\n';
    return monotone && crosscheck_ok ? 0 : 1;
}

inline int cmd_dynamics(const RunConfig& cfg, const OutputOptions& out) {
    using namespace detail;
    const CouplingSet c = cfg.couplings();
    const LatticeSpec lattice = cfg.lattice();
    const MagnonDynamics dyn(lattice, c, cfg.h);
    const ThermalParams p(cfg.beta, cfg.h);

    double m = 0.0;
    std::vector<double> occupations;
    if (cfg.dynamics_m) {
        m = *cfg.dynamics_m;
        if (m == 0.0) throw RegimeError("dynamics undefined at vanishing magnetization (dynamics.m = 0)");
        for (double d : dyn.symbols()) occupations.push_back(occupation_from_symbol(d, m, p));
    } else {
        const SpinWaveSolution s = solve_magnetization(p, c, dyn.grid(), {cfg.solve_tol, cfg.scan_points});
        m = s.m_star;
        occupations = s.occupations;
    }
    const GaussianMagnonState initial =
        cfg.dynamics_initial == "equilibrium"
            ? dyn.equilibrium_state(m, occupations)
            : wave_packet(lattice, m, cfg.packet_center, cfg.packet_width, cfg.packet_k, cfg.packet_number);

    const double n0 = dyn.total_number(initial);
    const double e0 = dyn.energy(initial);
    const double tol = cfg.dynamics_check_tol;
    bool ok = true;

    struct Sample {
        double t;
        std::vector<double> density;
        double number, energy;
    };
    std::vector<Sample> samples;
    std::optional<GaussianMagnonState> last;
    for (double t : cfg.dynamics_times) {
        GaussianMagnonState s = dyn.evolve(initial, t);
        Sample smp{t, dyn.number_density(s), dyn.total_number(s), dyn.energy(s)};
        const double herm = (s.gamma - s.gamma.adjoint()).cwiseAbs().maxCoeff();
        if (std::abs(smp.number - n0) > tol * std::max(1.0, std::abs(n0)) ||
            std::abs(smp.energy - e0) > tol * std::max(1.0, std::abs(e0)) || herm > tol)
            ok = false;
        samples.push_back(std::move(smp));
        last = std::move(s);
    }

    auto os = io::open_output(artifact(out, "dynamics"));
    if (out.format == Format::Json) {
        json j;
        j["config"] = config_json(cfg);
        j["m"] = m;
        j["initial_number"] = n0;
        j["initial_energy"] = e0;
        j["conservation_ok"] = ok;
        json arr = json::array();
        for (const auto& s : samples) arr.push_back({{"t", s.t}, {"number", s.number}, {"energy", s.energy}, {"density", s.density}});
        j["samples"] = arr;
        const GaussianMagnonState snap = dyn.to_mode(last ? *last : initial);
        json re = json::array(), im = json::array();
        for (Eigen::Index a = 0; a < snap.gamma.rows(); ++a) {
            std::vector<double> r, i;
            for (Eigen::Index b = 0; b < snap.gamma.cols(); ++b) {
                r.push_back(snap.gamma(a, b).real());
                i.push_back(snap.gamma(a, b).imag());
            }
            re.push_back(r);
            im.push_back(i);
        }
        j["gamma_mode"] = {{"t", last ? samples.back().t : 0.0}, {"re", re}, {"im", im}};
        io::write_json(os, j);
    } else {
        io::write_config_comment(os, cfg.effective);
        auto cols = std::vector<std::string>{"t"};
        for (auto& x : axis_names("x", cfg.dim)) cols.push_back(x);
        cols.emplace_back("density");
        os << io::join(cols) << '\n';
        for (const auto& s : samples)
            for (std::size_t x = 0; x < lattice.num_sites(); ++x) {
                std::vector<std::string> cells{format_double(s.t)};
                for (int v : lattice.site(x)) cells.push_back(std::to_string(v));
                cells.push_back(format_double(s.density[x]));
                os << io::join(cells) << '\n';
            }
    }
    *out.log << "m=" << format_double(m) << " samples=" << samples.size() << " conservation_ok=" << ok << '\n';
    return ok ? 0 : 1;
}

inline int cmd_sectors(int n, const OutputOptions& out, const std::map<std::string, std::string>& effective = {}) {
    using namespace detail;
    const SectorTable t = sector_decomposition(n);
    auto os = io::open_output(artifact(out, "sectors"));
    if (out.format == Format::Json) {
        json j;
        if (!effective.empty()) {
            json cj = json::object();
            for (const auto& [k, v] : effective) cj[k] = v;
            j["config"] = cj;
        }
        j["n"] = n;
        json arr = json::array();
        for (const auto& e : t.entries)
            arr.push_back({{"two_j", e.two_j}, {"multiplicity", e.multiplicity}, {"block_dim", e.block_dim()}});
        j["sectors"] = arr;
        j["total_dimension"] = t.total_dimension();
        io::write_json(os, j);
    } else {
        io::write_config_comment(os, effective);
        os << "two_j,j,multiplicity,block_dim\n";
        for (const auto& e : t.entries)
            os << e.two_j << ',' << format_double(e.j()) << ',' << e.multiplicity << ',' << e.block_dim() << '\n';
    }
    auto& log = *out.log;
    log << "n=" << n << " (S=" << format_double(0.5 * (n - 1)) << ")\n";
    for (const auto& e : t.entries)
        log << "  j=" << e.two_j << "/2 multiplicity=" << e.multiplicity << " dim=" << e.block_dim() << '\n';
    log << "  total dimension " << t.total_dimension() << " = 2^" << n << '\n';
    return 0;
}

} // namespace magnon::cli
