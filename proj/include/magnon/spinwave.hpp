#pragma once

// Infinite-spin quasi-free theory: magnon occupation, dispersion, the
// self-consistency equation for the magnetization and its low-temperature
// bound.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "magnon/error.hpp"
#include "magnon/lattice.hpp"

namespace magnon {

struct ThermalParams {
    double beta = 1.0;
    double h = 0.0;

    ThermalParams() = default;
    ThermalParams(double beta_, double h_) : beta(beta_), h(h_) {
        if (!std::isfinite(beta) || beta <= 0.0) throw InputError("beta must be finite and > 0");
        if (!std::isfinite(h)) throw InputError("field h must be finite");
    }
};

namespace detail {

inline constexpr double kFlushBelow = 1e-300;

inline void check_magnetization(double m) {
    if (!(m >= -1.0 && m <= 0.0)) throw InputError("magnetization must lie in [-1, 0]");
}

} // namespace detail

/// Occupation as a function of the symbol value D(q):
/// n = -m / (exp(2 beta (h - m D)) - 1).
inline double occupation_from_symbol(double d, double m, const ThermalParams& p) {
    detail::check_magnetization(m);
    const double arg = 2.0 * p.beta * (p.h - m * d);
    if (!(arg > 0.0)) throw RegimeError("outside ferromagnetic regime: h - m D(q) <= 0");
    if (m == 0.0) return 0.0;
    const double n = -m / std::expm1(arg);
    return n < detail::kFlushBelow ? 0.0 : n;
}

inline double occupation(const Momentum& q, double m, const ThermalParams& p, const CouplingSet& c) {
    return occupation_from_symbol(d_of_q(c, q), m, p);
}

inline double dispersion_from_symbol(double d, double m, const ThermalParams& p) {
    detail::check_magnetization(m);
    if (m == 0.0) throw RegimeError("spectrum undefined at vanishing magnetization");
    return 2.0 * (d + p.h / (-m));
}

/// eps(q) = 2 (J3(0) - J(q) + h / (-m)).
inline double dispersion(const Momentum& q, double m, const ThermalParams& p, const CouplingSet& c) {
    return dispersion_from_symbol(d_of_q(c, q), m, p);
}

/// G(m) = (1/|grid|) sum_q n(q; m) - (1 + m) / 2, with D(q) tabulated once.
/// The sum runs in grid order so values are reproducible bit for bit.
class SelfConsistency {
public:
    SelfConsistency(const ThermalParams& p, const CouplingSet& c, const MomentumGrid& grid) : p_(p) {
        symbols_.reserve(grid.size());
        for (const auto& k : grid.points()) symbols_.push_back(d_of_q(c, k));
    }

    double operator()(double m) const {
        double sum = 0.0;
        for (double d : symbols_) sum += occupation_from_symbol(d, m, p_);
        return sum / static_cast<double>(symbols_.size()) - 0.5 * (1.0 + m);
    }

    const std::vector<double>& symbols() const { return symbols_; }
    const ThermalParams& params() const { return p_; }

private:
    ThermalParams p_;
    std::vector<double> symbols_;
};

inline double selfconsistency_defect(double m, const ThermalParams& p, const CouplingSet& c, const MomentumGrid& grid) {
    return SelfConsistency(p, c, grid)(m);
}

struct MagnetizationBound {
    double value = 0.0;                    ///< -1 + 2/(e^{2 beta h} - 1)
    std::optional<double> symbol_variant;  ///< -1 + 2/(e^{2 beta D(0)} - 1), when D(0) > 0
    std::optional<double> asymptote;       ///< -1 + 2 e^{-2 beta D(0)}, when D(0) > 0
    double tightest = 0.0;                 ///< smallest applicable bound
};

inline MagnetizationBound magnetization_bound(const ThermalParams& p, const CouplingSet& c) {
    if (!(p.beta * p.h > 0.0)) throw InputError("magnetization bound needs beta h > 0");
    MagnetizationBound b;
    b.value = -1.0 + 2.0 / std::expm1(2.0 * p.beta * p.h);
    b.tightest = b.value;
    const double d0 = d_of_q(c, Momentum(c.dim(), 0.0));
    if (d0 > 0.0) {
        b.symbol_variant = -1.0 + 2.0 / std::expm1(2.0 * p.beta * d0);
        b.asymptote = -1.0 + 2.0 * std::exp(-2.0 * p.beta * d0);
        // the D(0) form only follows from the field form when h > D(0)
        if (p.h > d0) b.tightest = std::min(b.value, *b.symbol_variant);
    }
    return b;
}

struct SpinWaveSolution {
    double m_star = 0.0;
    std::vector<double> symbols;      ///< D(q), grid order
    std::vector<double> occupations;  ///< n(q) at m_star
    std::vector<double> dispersion;   ///< eps(q) at m_star
    double residual = 0.0;
    std::vector<double> all_roots;
    bool multiple_roots = false;
    double bound = 0.0;
    MagnetizationBound bound_detail;
    double tol = 0.0;
    int scan_points = 0;
};

struct SolverOptions {
    double tol = 1e-12;
    int scan_points = 4096;
    int max_bisections = 200;
};

namespace detail {

/// Bisection on a bracket [a, b] with G(a), G(b) of opposite sign. Stops when
/// the bracket is below tol and |G| <= tol, or when the midpoint no longer
/// moves in floating point.
template <class F>
double bisect(const F& g, double a, double b, double ga, double tol, int max_iter) {
    double best = a, best_abs = std::abs(ga);
    for (int it = 0; it < max_iter; ++it) {
        const double mid = 0.5 * (a + b);
        if (mid == a || mid == b) break;
        const double gm = g(mid);
        if (std::abs(gm) < best_abs) {
            best = mid;
            best_abs = std::abs(gm);
        }
        if (gm == 0.0) return mid;
        if ((gm > 0.0) == (ga > 0.0)) {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
        if (b - a <= tol && best_abs <= tol) break;
    }
    const double gb = g(b);
    if (std::abs(gb) < best_abs) best = b;
    return best;
}

} // namespace detail

/// Roots of the self-consistency equation on [-1, 0]: uniform scan for sign
/// changes followed by bisection. m_star is the root nearest -1.
inline SpinWaveSolution solve_magnetization(const ThermalParams& p, const CouplingSet& c, const MomentumGrid& grid,
                                            const SolverOptions& opt = {}) {
    if (!(opt.tol > 0.0)) throw InputError("solver tolerance must be > 0");
    if (opt.scan_points < 2) throw InputError("scan_points must be >= 2");
    const auto report = validate_ferromagnetic(c.with_field(p.h), grid);
    if (!report.ferromagnetic()) throw RegimeError("outside ferromagnetic regime: " + report.messages.back());

    const SelfConsistency g(p, c, grid);
    const double g_lo = g(-1.0), g_hi = g(0.0);
    if (!(g_lo >= 0.0 && g_hi < 0.0)) throw RegimeError("no self-consistent magnetization");

    SpinWaveSolution sol;
    sol.tol = opt.tol;
    sol.scan_points = opt.scan_points;
    const int n = opt.scan_points;
    auto node = [n](int i) { return i == n - 1 ? 0.0 : -1.0 + static_cast<double>(i) / (n - 1); };
    double m_prev = node(0), g_prev = g_lo;
    for (int i = 1; i < n; ++i) {
        const double m_i = node(i);
        const double g_i = i == n - 1 ? g_hi : g(m_i);
        if (g_prev == 0.0) {
            sol.all_roots.push_back(m_prev);
        } else if ((g_prev > 0.0) != (g_i > 0.0) && g_i != 0.0) {
            sol.all_roots.push_back(detail::bisect(g, m_prev, m_i, g_prev, opt.tol, opt.max_bisections));
        }
        m_prev = m_i;
        g_prev = g_i;
    }
    if (sol.all_roots.empty()) throw RegimeError("no self-consistent magnetization");
    // G(0) = -1/2 keeps every root strictly below zero

    sol.multiple_roots = sol.all_roots.size() > 1;
    sol.m_star = sol.all_roots.front();
    sol.residual = std::abs(g(sol.m_star));
    if (sol.residual > opt.tol) throw RegimeError("bisection did not reach the requested tolerance");

    sol.symbols = g.symbols();
    sol.occupations.reserve(grid.size());
    sol.dispersion.reserve(grid.size());
    for (double d : sol.symbols) {
        sol.occupations.push_back(occupation_from_symbol(d, sol.m_star, p));
        sol.dispersion.push_back(dispersion_from_symbol(d, sol.m_star, p));
    }
    sol.bound_detail = magnetization_bound(p, c);
    sol.bound = sol.bound_detail.value;
    return sol;
}

} // namespace magnon
