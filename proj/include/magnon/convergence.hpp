#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "magnon/gibbs.hpp"
#include "magnon/spinwave.hpp"

namespace magnon {

struct ConvergenceRow {
    int copies = 0;
    double magnetization = 0.0;  ///< m_n = omega(sigma3)
    double two_point = 0.0;      ///< t_n = omega(F+(q) F-(q))
    double prediction = 0.0;     ///< p_n = occupation(q; m_n)
    double discrepancy = 0.0;    ///< |t_n - p_n|
    double wick = 0.0;
    /// max deviation of (log Z, m_n, t_n) from the full-tensor route, when run
    std::optional<double> crosscheck;
};

struct ConvergenceOptions {
    std::vector<int> copies{1, 3, 5, 7};
    std::vector<int> crosscheck_copies;  ///< n values also run in full-tensor mode
    OracleLimits limits;
};

/// Exact finite-n fluctuation two-point function against the infinite-spin
/// occupation evaluated at the oracle's own magnetization.
inline std::vector<ConvergenceRow> convergence_study(const LatticeSpec& lattice, const CouplingSet& couplings,
                                                     double beta, const Momentum& q, const ConvergenceOptions& opt = {}) {
    std::vector<ConvergenceRow> rows;
    const ThermalParams p(beta, couplings.field());
    for (int n : opt.copies) {
        const SpinConfig cfg(n, lattice, couplings);
        const GibbsEnsemble g = build_gibbs(cfg, beta, OracleMode::Sector, opt.limits);
        ConvergenceRow r;
        r.copies = n;
        r.magnetization = g.magnetization();
        r.two_point = fluctuation_two_point(g, q);
        r.prediction = occupation(q, r.magnetization, p, couplings);
        r.discrepancy = std::abs(r.two_point - r.prediction);
        r.wick = wick_residual(g, q);
        for (int c : opt.crosscheck_copies) {
            if (c != n) continue;
            const GibbsEnsemble f = build_gibbs(cfg, beta, OracleMode::FullTensor, opt.limits);
            r.crosscheck = std::max({std::abs(f.log_z() - g.log_z()), std::abs(f.magnetization() - r.magnetization),
                                     std::abs(fluctuation_two_point(f, q) - r.two_point)});
        }
        rows.push_back(r);
    }
    return rows;
}

/// True when the discrepancy column decreases by more than tol at every step.
inline bool strictly_decreasing_discrepancy(const std::vector<ConvergenceRow>& rows, double tol = 0.0) {
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (!(rows[i].discrepancy < rows[i - 1].discrepancy - tol)) return false;
    return true;
}

} // namespace magnon
