#pragma once

// Gaussian (quasi-free) magnon states of the quadratic Hamiltonian
//   H = sum_q eps(q) F+(q) F-(q),   [F-(q), F+(q')] = -m delta(q, q'),
// where m = omega(sigma3) in [-1, 0) plays the role of Planck's constant.
// A state is its normally ordered covariance gamma = <F+ F->; the opposite
// ordering always comes from the commutator.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "magnon/error.hpp"
#include "magnon/lattice.hpp"
#include "magnon/spinwave.hpp"

namespace magnon {

enum class Basis { Site, Mode };

struct GaussianMagnonState {
    double m = -1.0;
    Eigen::MatrixXcd gamma;  ///< gamma(a, b) = <F+(a) F-(b)>
    Basis basis = Basis::Mode;

    GaussianMagnonState(double m_, Eigen::MatrixXcd gamma_, Basis basis_)
        : m(m_), gamma(std::move(gamma_)), basis(basis_) {
        if (!(m >= -1.0 && m < 0.0)) throw RegimeError("magnon dynamics needs m in [-1, 0)");
        if (gamma.rows() != gamma.cols()) throw InputError("covariance must be square");
    }
};

struct ModeSpectrum {
    std::vector<double> eps;    ///< eps(q) = 2 (D(q) + h / (-m))
    std::vector<double> omega;  ///< (-m) eps(q), the mode angular frequency
};

class MagnonDynamics {
public:
    MagnonDynamics(const LatticeSpec& lattice, const CouplingSet& couplings, double h)
        : grid_(lattice), couplings_(couplings), h_(h) {
        if (couplings.dim() != lattice.dim()) throw InputError("coupling and lattice dimensions differ");
        const std::size_t n = lattice.num_sites();
        symbols_.reserve(n);
        for (const auto& k : grid_.points()) symbols_.push_back(d_of_q(couplings, k));
        jmat_ = lattice_coupling_matrix(couplings, Coupling::J, lattice);

        // F+(x) = |L|^{-1/2} sum_q F+(q) e^{-iq.x}: fourier_(x, q) = e^{-iq.x} / sqrt|L|
        fourier_.resize(n, n);
        const double norm = 1.0 / std::sqrt(double(n));
        for (std::size_t x = 0; x < n; ++x) {
            const IntVec site = lattice.site(x);
            for (std::size_t q = 0; q < n; ++q) {
                double a = 0.0;
                for (std::size_t d = 0; d < site.size(); ++d) a += grid_[q][d] * site[d];
                fourier_(x, q) = std::polar(norm, -a);
            }
        }
    }

    const MomentumGrid& grid() const { return grid_; }
    std::size_t size() const { return grid_.size(); }
    double field() const { return h_; }
    const std::vector<double>& symbols() const { return symbols_; }
    const Eigen::MatrixXcd& fourier() const { return fourier_; }

    ModeSpectrum spectrum(double m) const {
        const ThermalParams p(1.0, h_);
        ModeSpectrum s;
        for (double d : symbols_) {
            s.eps.push_back(dispersion_from_symbol(d, m, p));
            s.omega.push_back(-m * s.eps.back());
        }
        return s;
    }

    GaussianMagnonState to_site(const GaussianMagnonState& s) const {
        check_size(s);
        if (s.basis == Basis::Site) return s;
        return {s.m, fourier_ * s.gamma * fourier_.adjoint(), Basis::Site};
    }

    GaussianMagnonState to_mode(const GaussianMagnonState& s) const {
        check_size(s);
        if (s.basis == Basis::Mode) return s;
        return {s.m, fourier_.adjoint() * s.gamma * fourier_, Basis::Mode};
    }

    /// Diagonal mode covariance with the given occupations n(q).
    GaussianMagnonState equilibrium_state(double m, const std::vector<double>& occupations) const {
        if (occupations.size() != size()) throw InputError("occupation vector does not match the grid");
        Eigen::VectorXcd d(size());
        for (std::size_t q = 0; q < size(); ++q) {
            if (!(occupations[q] >= 0.0)) throw InputError("occupations must be >= 0");
            d[q] = occupations[q];
        }
        return {m, d.asDiagonal().toDenseMatrix(), Basis::Mode};
    }

    GaussianMagnonState equilibrium_state(const SpinWaveSolution& sol) const {
        if (sol.m_star == 0.0) throw RegimeError("dynamics undefined at vanishing magnetization");
        return equilibrium_state(sol.m_star, sol.occupations);
    }

    /// Exact Heisenberg evolution: F-(q, t) = e^{i m eps(q) t} F-(q), so
    /// gamma(q, q') picks up e^{-i m (eps(q) - eps(q')) t}. Returned in the
    /// input basis.
    GaussianMagnonState evolve(const GaussianMagnonState& s, double t) const {
        if (!std::isfinite(t)) throw InputError("evolution time must be finite");
        GaussianMagnonState mode = to_mode(s);
        const ModeSpectrum sp = spectrum(s.m);
        Eigen::VectorXcd phase(size());
        for (std::size_t q = 0; q < size(); ++q) phase[q] = std::polar(1.0, sp.omega[q] * t);
        mode.gamma = phase.asDiagonal() * mode.gamma * phase.conjugate().asDiagonal();
        return s.basis == Basis::Mode ? mode : to_site(mode);
    }

    /// <F+(x) F-(x)> per site.
    std::vector<double> number_density(const GaussianMagnonState& s) const {
        const GaussianMagnonState site = to_site(s);
        std::vector<double> out(size());
        for (std::size_t x = 0; x < size(); ++x) out[x] = site.gamma(x, x).real();
        return out;
    }

    /// Expectation of the number-operator equation of motion,
    ///   -2m sum_y J(x,y) (<F+(y) F-(x)> - <F-(y) F+(x)>),
    /// with <F-(y) F+(x)> = gamma(x, y) - m delta(x, y). That sum is purely
    /// imaginary; the real rate d<F+(x)F-(x)>/dt is -i times it.
    std::vector<double> rhs_eq15(const GaussianMagnonState& s) const {
        const GaussianMagnonState site = to_site(s);
        const auto& g = site.gamma;
        std::vector<double> out(size());
        for (std::size_t x = 0; x < size(); ++x) {
            std::complex<double> acc = 0.0;
            for (std::size_t y = 0; y < size(); ++y) {
                if (jmat_(x, y) == 0.0) continue;
                const std::complex<double> reverse = g(x, y) - (x == y ? s.m : 0.0);
                acc += jmat_(x, y) * (g(y, x) - reverse);
            }
            out[x] = (std::complex<double>(0.0, -1.0) * (-2.0 * s.m) * acc).real();
        }
        return out;
    }

    double total_number(const GaussianMagnonState& s) const { return s.gamma.trace().real(); }

    /// sum_q eps(q) gamma(q, q)
    double energy(const GaussianMagnonState& s) const {
        const GaussianMagnonState mode = to_mode(s);
        const ModeSpectrum sp = spectrum(s.m);
        double e = 0.0;
        for (std::size_t q = 0; q < size(); ++q) e += sp.eps[q] * mode.gamma(q, q).real();
        return e;
    }

private:
    void check_size(const GaussianMagnonState& s) const {
        if (static_cast<std::size_t>(s.gamma.rows()) != size()) throw InputError("covariance does not match the lattice");
    }

    MomentumGrid grid_;
    CouplingSet couplings_;
    double h_;
    std::vector<double> symbols_;
    Eigen::MatrixXd jmat_;
    Eigen::MatrixXcd fourier_;
};

/// Rank-one site-basis packet gamma = N phi phi^dagger with
/// phi(x) ~ exp(-|x - center|^2 / (2 width^2) + i k.x), |phi| = 1.
/// Distances are taken on the torus.
inline GaussianMagnonState wave_packet(const LatticeSpec& lattice, double m, const std::vector<double>& center,
                                       double width, const Momentum& k, double number) {
    if (!(width > 0.0)) throw InputError("packet width must be > 0");
    if (!(number >= 0.0)) throw InputError("packet magnon number must be >= 0");
    if (center.size() != static_cast<std::size_t>(lattice.dim()) || k.size() != center.size())
        throw InputError("packet center/momentum have wrong dimension");
    const std::size_t n = lattice.num_sites();
    const double L = lattice.linear_size();
    Eigen::VectorXcd phi(n);
    for (std::size_t x = 0; x < n; ++x) {
        const IntVec v = lattice.site(x);
        double r2 = 0.0, a = 0.0;
        for (std::size_t d = 0; d < v.size(); ++d) {
            double dx = std::remainder(v[d] - center[d], L);
            r2 += dx * dx;
            a += k[d] * v[d];
        }
        phi[x] = std::polar(std::exp(-r2 / (2.0 * width * width)), a);
    }
    phi.normalize();
    return {m, number * phi * phi.adjoint(), Basis::Site};
}

} // namespace magnon
