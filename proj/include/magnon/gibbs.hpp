#pragma once

// Exact Gibbs state of the rescaled Heisenberg Hamiltonian
//
//   H = -1/(2n) sum_{x,y} [4 J(x,y) S+(x) S-(y) + J3(x,y) S3(x) S3(y)] + h sum_x S3(x)
//
// for n = 2S+1 spin-1/2 copies per site, with S# the collective Pauli sums
// (S3 has eigenvalues -n..n, [S+, S-] = S3). Two routes are provided:
//
//   sector       per-site total-spin decomposition; the trace over the n copies
//                is a multiplicity-weighted sum over spin-j assignments.
//   full-tensor  brute force on (C^2)^{(x) n|L|} built from individual Paulis.
//
// Both routes diagonalize per total-S3 charge, which H conserves.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "magnon/error.hpp"
#include "magnon/lattice.hpp"
#include "magnon/sectors.hpp"

namespace magnon {

using cplx = std::complex<double>;
using RealOp = Eigen::SparseMatrix<double>;
using ComplexOp = Eigen::SparseMatrix<cplx>;

enum class OracleMode { Sector, FullTensor };

inline const char* to_string(OracleMode m) { return m == OracleMode::Sector ? "sector" : "full-tensor"; }

struct SpinConfig {
    int copies;  ///< n = 2S+1
    LatticeSpec lattice;
    CouplingSet couplings;

    SpinConfig(int n, LatticeSpec lat, CouplingSet c)
        : copies(n), lattice(std::move(lat)), couplings(std::move(c)) {
        if (n < 1 || n % 2 == 0) throw InputError("copy count n = 2S+1 must be odd and >= 1");
        if (couplings.dim() != lattice.dim()) throw InputError("coupling and lattice dimensions differ");
    }

    double spin() const { return 0.5 * (copies - 1); }
};

struct OracleLimits {
    std::size_t max_block_dim = 10000;          ///< sector mode, per assignment
    std::size_t max_full_dim = std::size_t{1} << 12;  ///< full-tensor mode
    int threads = 1;
};

/// One independent block of the Hilbert space: a tensor product of per-site
/// local spaces, entering the trace with multiplicity exp(log_weight).
struct GibbsBlock {
    std::vector<int> two_j;  ///< per-site spin label; empty in full-tensor mode
    double log_weight = 0.0;
    std::size_t dim = 0;
    std::vector<RealOp> raise;            ///< S+(x)
    std::vector<Eigen::VectorXd> s3;      ///< diagonal of S3(x)
    std::vector<int> charge;              ///< sum_x S3(x) per basis state
    Eigen::MatrixXd hamiltonian;
    Eigen::VectorXd energies;
    Eigen::MatrixXd rho;  ///< block of the normalized Gibbs density matrix (weight included)
};

namespace detail {

struct LocalSpace {
    int dim = 0;
    std::vector<int> s3;
    struct Entry {
        int to, from;
        double value;
    };
    std::vector<Entry> raise;
};

/// Spin-j irreducible in Pauli-sum units: basis |j, m>, m = j..-j,
/// S3 = 2m and S+ the standard raising operator.
inline LocalSpace spin_irrep(int two_j) {
    LocalSpace s;
    s.dim = two_j + 1;
    for (int a = 0; a < s.dim; ++a) s.s3.push_back(two_j - 2 * a);
    for (int a = 1; a < s.dim; ++a) {
        const int tm = s.s3[a];
        s.raise.push_back({a - 1, a, 0.5 * std::sqrt(double(two_j - tm) * double(two_j + tm + 2))});
    }
    return s;
}

/// n spin-1/2 copies, one bit each (set = up), S+ = sum_i sigma_i^+.
inline LocalSpace qubit_copies(int n) {
    LocalSpace s;
    s.dim = 1 << n;
    for (int b = 0; b < s.dim; ++b) {
        s.s3.push_back(2 * std::popcount(static_cast<unsigned>(b)) - n);
        for (int i = 0; i < n; ++i)
            if (!(b & (1 << i))) s.raise.push_back({b | (1 << i), b, 1.0});
    }
    return s;
}

struct ChargeEigen {
    std::vector<Eigen::Index> indices;
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};

struct BlockWork {
    GibbsBlock block;
    std::vector<ChargeEigen> eig;
};

inline void assemble_block(BlockWork& w, const std::vector<LocalSpace>& sites, int copies, const Eigen::MatrixXd& jmat,
                           const Eigen::MatrixXd& j3mat, double h) {
    GibbsBlock& b = w.block;
    const std::size_t ns = sites.size();
    std::vector<std::size_t> stride(ns, 1);
    for (std::size_t x = ns; x-- > 1;) stride[x - 1] = stride[x] * static_cast<std::size_t>(sites[x].dim);
    b.dim = stride[0] * static_cast<std::size_t>(sites[0].dim);
    const auto dim = static_cast<Eigen::Index>(b.dim);

    b.s3.assign(ns, Eigen::VectorXd::Zero(dim));
    b.charge.assign(b.dim, 0);
    for (std::size_t i = 0; i < b.dim; ++i) {
        for (std::size_t x = 0; x < ns; ++x) {
            const int local = static_cast<int>((i / stride[x]) % sites[x].dim);
            b.s3[x][i] = sites[x].s3[local];
            b.charge[i] += sites[x].s3[local];
        }
    }

    b.raise.clear();
    for (std::size_t x = 0; x < ns; ++x) {
        std::vector<Eigen::Triplet<double>> t;
        const std::size_t outer = b.dim / (stride[x] * sites[x].dim);
        for (std::size_t hi = 0; hi < outer; ++hi)
            for (std::size_t lo = 0; lo < stride[x]; ++lo) {
                const std::size_t base = hi * stride[x] * sites[x].dim + lo;
                for (const auto& e : sites[x].raise)
                    t.emplace_back(static_cast<int>(base + e.to * stride[x]), static_cast<int>(base + e.from * stride[x]),
                                   e.value);
            }
        RealOp op(dim, dim);
        op.setFromTriplets(t.begin(), t.end());
        b.raise.push_back(std::move(op));
    }

    const double pref = 1.0 / (2.0 * copies);
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(dim);
    for (std::size_t x = 0; x < ns; ++x) {
        diag += h * b.s3[x];
        for (std::size_t y = 0; y < ns; ++y)
            if (j3mat(x, y) != 0.0) diag -= pref * j3mat(x, y) * b.s3[x].cwiseProduct(b.s3[y]);
    }
    RealOp hop(dim, dim);
    for (std::size_t x = 0; x < ns; ++x)
        for (std::size_t y = 0; y < ns; ++y)
            if (jmat(x, y) != 0.0) {
                RealOp lower = b.raise[y].transpose();
                hop += (-4.0 * pref * jmat(x, y)) * RealOp(b.raise[x] * lower);
            }
    b.hamiltonian = Eigen::MatrixXd(hop);
    b.hamiltonian.diagonal() += diag;

    // charge-resolved dense eigendecomposition
    std::vector<int> charges = b.charge;
    std::sort(charges.begin(), charges.end());
    charges.erase(std::unique(charges.begin(), charges.end()), charges.end());
    b.energies.resize(dim);
    Eigen::Index filled = 0;
    for (int q : charges) {
        ChargeEigen ce;
        for (std::size_t i = 0; i < b.dim; ++i)
            if (b.charge[i] == q) ce.indices.push_back(static_cast<Eigen::Index>(i));
        const Eigen::MatrixXd sub = b.hamiltonian(ce.indices, ce.indices);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub);
        if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
        ce.values = es.eigenvalues();
        ce.vectors = es.eigenvectors();
        b.energies.segment(filled, ce.values.size()) = ce.values;
        filled += ce.values.size();
        w.eig.push_back(std::move(ce));
    }
}

template <class F>
void parallel_for(std::size_t count, int threads, F&& f) {
    const std::size_t requested =
        threads > 0 ? static_cast<std::size_t>(threads) : std::max<std::size_t>(1, std::thread::hardware_concurrency());
    const std::size_t workers = std::min(count, requested);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) f(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < count; i += workers) f(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline double log_sum_exp(const std::vector<double>& v) {
    double hi = -std::numeric_limits<double>::infinity();
    for (double a : v) hi = std::max(hi, a);
    if (!std::isfinite(hi)) return hi;
    double s = 0.0;
    for (double a : v) s += std::exp(a - hi);
    return hi + std::log(s);
}

} // namespace detail

class GibbsEnsemble {
public:
    const SpinConfig& config() const { return cfg_; }
    OracleMode mode() const { return mode_; }
    double beta() const { return beta_; }
    double log_z() const { return log_z_; }
    double ground_energy() const { return e0_; }
    const std::vector<GibbsBlock>& blocks() const { return blocks_; }
    std::size_t num_sites() const { return cfg_.lattice.num_sites(); }
    int copies() const { return cfg_.copies; }

    /// log Z recomputed as one log-sum-exp over every (block, eigenvalue) term.
    double recompute_log_z() const {
        std::vector<double> terms;
        for (const auto& b : blocks_)
            for (Eigen::Index k = 0; k < b.energies.size(); ++k) terms.push_back(b.log_weight - beta_ * b.energies[k]);
        return detail::log_sum_exp(terms);
    }

    /// omega(A) for an operator given blockwise.
    template <class OpFn>
    cplx expectation(OpFn&& op) const {
        cplx acc = 0.0;
        for (const auto& b : blocks_) {
            const auto a = op(b);
            acc += trace_product(b.rho, a);
        }
        return acc;
    }

    double s3_mean(std::size_t x) const { return s3_mean_[x]; }
    double raise_mean(std::size_t x) const { return raise_mean_[x]; }
    double lower_mean(std::size_t x) const { return lower_mean_[x]; }
    /// omega(S+(x) S-(y))
    double two_point(std::size_t x, std::size_t y) const { return two_point_(x, y); }

    /// omega(sigma3) = (1/(n|L|)) sum_x omega(S3(x)).
    double magnetization() const {
        double s = 0.0;
        for (double v : s3_mean_) s += v;
        return s / (static_cast<double>(cfg_.copies) * num_sites());
    }

    /// Phase e^{i k.x} for site index x.
    cplx phase(const Momentum& k, std::size_t x) const {
        const IntVec v = cfg_.lattice.site(x);
        double a = 0.0;
        for (std::size_t d = 0; d < v.size(); ++d) a += k[d] * v[d];
        return std::polar(1.0, a);
    }

    friend GibbsEnsemble build_gibbs(const SpinConfig&, double, OracleMode, const OracleLimits&);

private:
    explicit GibbsEnsemble(SpinConfig cfg) : cfg_(std::move(cfg)) {}

    static cplx trace_product(const Eigen::MatrixXd& rho, const ComplexOp& a) {
        cplx s = 0.0;
        for (int col = 0; col < a.outerSize(); ++col)
            for (ComplexOp::InnerIterator it(a, col); it; ++it) s += it.value() * rho(it.col(), it.row());
        return s;
    }
    static cplx trace_product(const Eigen::MatrixXd& rho, const RealOp& a) {
        double s = 0.0;
        for (int col = 0; col < a.outerSize(); ++col)
            for (RealOp::InnerIterator it(a, col); it; ++it) s += it.value() * rho(it.col(), it.row());
        return s;
    }
    static cplx trace_product(const Eigen::MatrixXd& rho, const Eigen::MatrixXcd& a) {
        return (a.transpose().array() * rho.array().cast<cplx>()).sum();
    }

    SpinConfig cfg_;
    OracleMode mode_ = OracleMode::Sector;
    double beta_ = 0.0;
    double log_z_ = 0.0;
    double e0_ = 0.0;
    std::vector<GibbsBlock> blocks_;
    std::vector<double> s3_mean_, raise_mean_, lower_mean_;
    Eigen::MatrixXd two_point_;
};

inline GibbsEnsemble build_gibbs(const SpinConfig& cfg, double beta, OracleMode mode, const OracleLimits& limits = {}) {
    if (!std::isfinite(beta) || beta < 0.0) throw InputError("beta must be finite and >= 0");
    const std::size_t ns = cfg.lattice.num_sites();
    const int n = cfg.copies;

    std::vector<std::vector<detail::LocalSpace>> layouts;
    std::vector<std::vector<int>> labels;
    std::vector<double> log_weights;
    if (mode == OracleMode::Sector) {
        const SectorTable table = sector_decomposition(n);
        double biggest = 1.0;
        for (std::size_t x = 0; x < ns; ++x) biggest *= (n + 1);
        if (biggest > static_cast<double>(limits.max_block_dim))
            throw InputError("sector block dimension " + std::to_string(static_cast<long long>(biggest)) +
                             " exceeds cap " + std::to_string(limits.max_block_dim));
        std::vector<detail::LocalSpace> irreps;
        for (const auto& e : table.entries) irreps.push_back(detail::spin_irrep(e.two_j));
        const std::size_t ne = table.entries.size();
        std::vector<std::size_t> pick(ns, 0);
        while (true) {
            std::vector<detail::LocalSpace> layout;
            std::vector<int> label;
            double lw = 0.0;
            for (std::size_t x = 0; x < ns; ++x) {
                layout.push_back(irreps[pick[x]]);
                label.push_back(table.entries[pick[x]].two_j);
                lw += std::log(static_cast<double>(table.entries[pick[x]].multiplicity));
            }
            layouts.push_back(std::move(layout));
            labels.push_back(std::move(label));
            log_weights.push_back(lw);
            std::size_t x = ns;
            while (x > 0 && ++pick[x - 1] == ne) pick[--x] = 0;
            if (x == 0) break;
        }
    } else {
        const double full = std::pow(2.0, double(n) * double(ns));
        if (full > static_cast<double>(limits.max_full_dim))
            throw InputError("full-tensor dimension 2^" + std::to_string(n * ns) + " exceeds cap " +
                             std::to_string(limits.max_full_dim));
        layouts.emplace_back(ns, detail::qubit_copies(n));
        labels.emplace_back();
        log_weights.push_back(0.0);
    }

    const Eigen::MatrixXd jmat = lattice_coupling_matrix(cfg.couplings, Coupling::J, cfg.lattice);
    const Eigen::MatrixXd j3mat = lattice_coupling_matrix(cfg.couplings, Coupling::J3, cfg.lattice);
    const double h = cfg.couplings.field();

    std::vector<detail::BlockWork> work(layouts.size());
    detail::parallel_for(layouts.size(), limits.threads, [&](std::size_t i) {
        work[i].block.two_j = labels[i];
        work[i].block.log_weight = log_weights[i];
        detail::assemble_block(work[i], layouts[i], n, jmat, j3mat, h);
    });

    GibbsEnsemble g(cfg);
    g.mode_ = mode;
    g.beta_ = beta;
    g.e0_ = std::numeric_limits<double>::infinity();
    for (const auto& w : work) g.e0_ = std::min(g.e0_, w.block.energies.minCoeff());

    // block partition sums relative to the ground energy, reduced in block order
    std::vector<double> log_terms;
    for (const auto& w : work) {
        double s = 0.0;
        for (Eigen::Index k = 0; k < w.block.energies.size(); ++k) s += std::exp(-beta * (w.block.energies[k] - g.e0_));
        log_terms.push_back(w.block.log_weight + std::log(s));
    }
    const double lse = detail::log_sum_exp(log_terms);
    g.log_z_ = lse - beta * g.e0_;

    detail::parallel_for(work.size(), limits.threads, [&](std::size_t i) {
        auto& b = work[i].block;
        const double scale = std::exp(b.log_weight - lse);
        b.rho = Eigen::MatrixXd::Zero(b.dim, b.dim);
        for (const auto& ce : work[i].eig) {
            const Eigen::VectorXd p = ((-beta) * (ce.values.array() - g.e0_)).exp() * scale;
            const Eigen::MatrixXd r = ce.vectors * p.asDiagonal() * ce.vectors.transpose();
            b.rho(ce.indices, ce.indices) = r;
        }
    });
    for (auto& w : work) g.blocks_.push_back(std::move(w.block));

    g.s3_mean_.assign(ns, 0.0);
    g.raise_mean_.assign(ns, 0.0);
    g.lower_mean_.assign(ns, 0.0);
    g.two_point_ = Eigen::MatrixXd::Zero(ns, ns);
    for (const auto& b : g.blocks_) {
        for (std::size_t x = 0; x < ns; ++x) {
            g.s3_mean_[x] += b.rho.diagonal().dot(b.s3[x]);
            g.raise_mean_[x] += GibbsEnsemble::trace_product(b.rho, b.raise[x]).real();
            g.lower_mean_[x] += GibbsEnsemble::trace_product(b.rho, RealOp(b.raise[x].transpose())).real();
            for (std::size_t y = 0; y < ns; ++y) {
                const RealOp lower = b.raise[y].transpose();
                g.two_point_(x, y) += GibbsEnsemble::trace_product(b.rho, RealOp(b.raise[x] * lower)).real();
            }
        }
    }
    return g;
}

enum class Fluctuation { Plus, Minus, Three, ThreeUncentered };

/// Fluctuation operator restricted to one block, normalized by 1/sqrt(n|L|):
///   Plus             sum_x e^{ik.x} S+(x)
///   Minus            sum_x e^{-ik.x} S-(x)   (adjoint of Plus)
///   Three            sum_x e^{ik.x} (S3(x) - n omega(sigma3))
///   ThreeUncentered  sum_x e^{ik.x} S3(x)
inline ComplexOp fluctuation_operator(const GibbsEnsemble& g, const GibbsBlock& b, Fluctuation kind, const Momentum& k) {
    const auto dim = static_cast<Eigen::Index>(b.dim);
    const double norm = 1.0 / std::sqrt(double(g.copies()) * double(g.num_sites()));
    ComplexOp out(dim, dim);
    const double center = kind == Fluctuation::Three ? g.copies() * g.magnetization() : 0.0;
    for (std::size_t x = 0; x < g.num_sites(); ++x) {
        const cplx ph = g.phase(k, x);
        switch (kind) {
        case Fluctuation::Plus: out += RealOp(b.raise[x]).cast<cplx>() * (norm * ph); break;
        case Fluctuation::Minus: out += RealOp(b.raise[x].transpose()).cast<cplx>() * (norm * std::conj(ph)); break;
        case Fluctuation::Three:
        case Fluctuation::ThreeUncentered: {
            Eigen::VectorXcd d = (b.s3[x].array() - center).cast<cplx>() * (norm * ph);
            ComplexOp diag(dim, dim);
            std::vector<Eigen::Triplet<cplx>> t;
            for (Eigen::Index i = 0; i < dim; ++i)
                if (d[i] != 0.0) t.emplace_back(i, i, d[i]);
            diag.setFromTriplets(t.begin(), t.end());
            out += diag;
            break;
        }
        }
    }
    return out;
}

/// omega(F+(q) F-(q)) from the cached collective two-point function; the
/// imaginary part is returned too and vanishes for Hermitian pairings.
inline cplx fluctuation_two_point_complex(const GibbsEnsemble& g, const Momentum& q) {
    cplx s = 0.0;
    for (std::size_t x = 0; x < g.num_sites(); ++x)
        for (std::size_t y = 0; y < g.num_sites(); ++y) s += g.phase(q, x) * std::conj(g.phase(q, y)) * g.two_point(x, y);
    return s / (double(g.copies()) * double(g.num_sites()));
}

inline double fluctuation_two_point(const GibbsEnsemble& g, const Momentum& q) {
    return fluctuation_two_point_complex(g, q).real();
}

/// omega([F+(k), F-(q)]) evaluated from the operators themselves.
inline cplx commutator_expectation(const GibbsEnsemble& g, const Momentum& k, const Momentum& q) {
    return g.expectation([&](const GibbsBlock& b) {
        const ComplexOp plus = fluctuation_operator(g, b, Fluctuation::Plus, k);
        const ComplexOp minus = fluctuation_operator(g, b, Fluctuation::Minus, q);
        return ComplexOp(plus * minus - minus * plus);
    });
}

struct EebSide {
    double lhs = 0.0;   ///< beta omega(X* [H, X])
    double rhs = 0.0;   ///< omega(X* X) ln(omega(X* X) / omega(X X*))
    double xstar_x = 0.0;
    double x_xstar = 0.0;
    bool trivial = false;  ///< a correlation fell below 1e-300

    double margin() const { return lhs - rhs; }
};

struct EebMargin {
    EebSide annihilation;  ///< X = F-(q)
    EebSide creation;      ///< X = F+(q)
};

namespace detail {

inline EebSide eeb_side(const GibbsEnsemble& g, const Momentum& q, Fluctuation x_kind) {
    const Fluctuation star_kind = x_kind == Fluctuation::Minus ? Fluctuation::Plus : Fluctuation::Minus;
    EebSide s;
    s.lhs = g.beta() * g.expectation([&](const GibbsBlock& b) {
                     const ComplexOp x = fluctuation_operator(g, b, x_kind, q);
                     const ComplexOp xs = fluctuation_operator(g, b, star_kind, q);
                     const Eigen::MatrixXcd hc = b.hamiltonian.cast<cplx>();
                     const Eigen::MatrixXcd comm = hc * x - x * hc;
                     return Eigen::MatrixXcd(xs * comm);
                 }).real();
    s.xstar_x = g.expectation([&](const GibbsBlock& b) {
                     return ComplexOp(fluctuation_operator(g, b, star_kind, q) * fluctuation_operator(g, b, x_kind, q));
                 }).real();
    s.x_xstar = g.expectation([&](const GibbsBlock& b) {
                     return ComplexOp(fluctuation_operator(g, b, x_kind, q) * fluctuation_operator(g, b, star_kind, q));
                 }).real();
    if (s.xstar_x < 1e-300 || s.x_xstar < 1e-300) {
        s.trivial = true;
        s.rhs = 0.0;
    } else {
        s.rhs = s.xstar_x * std::log(s.xstar_x / s.x_xstar);
    }
    return s;
}

} // namespace detail

/// Both sides of the energy-entropy balance inequality for X = F-(q) and
/// X = F+(q).
inline EebMargin eeb_margin(const GibbsEnsemble& g, const Momentum& q) {
    return {detail::eeb_side(g, q, Fluctuation::Minus), detail::eeb_side(g, q, Fluctuation::Plus)};
}

/// |omega(F+ F+ F- F-) - 2 omega(F+ F-)^2| at momentum q.
inline double wick_residual(const GibbsEnsemble& g, const Momentum& q) {
    const double four = g.expectation([&](const GibbsBlock& b) {
                             const ComplexOp plus = fluctuation_operator(g, b, Fluctuation::Plus, q);
                             const ComplexOp pair = plus * plus;
                             return ComplexOp(pair * ComplexOp(pair.adjoint()));
                         }).real();
    const double two = fluctuation_two_point(g, q);
    return std::abs(four - 2.0 * two * two);
}

} // namespace magnon
