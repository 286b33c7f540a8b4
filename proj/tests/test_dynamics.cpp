#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "magnon/dynamics.hpp"
#include "test_support.hpp"

using namespace magnon;
using namespace magnon::testing;
using std::numbers::pi;

namespace {

const std::complex<double> I{0.0, 1.0};

double max_abs(const Eigen::MatrixXcd& a) { return a.cwiseAbs().maxCoeff(); }

// Site-basis propagation with the single-particle frequency matrix
// Omega = 2 (-m) (lambda - J) + 2 h, diagonalized directly.
Eigen::MatrixXcd site_oracle(const LatticeSpec& lat, const CouplingSet& c, double h, double m,
                             const Eigen::MatrixXcd& gamma, double t) {
    const Eigen::MatrixXd j = lattice_coupling_matrix(c, Coupling::J, lat);
    const Eigen::MatrixXd j3 = lattice_coupling_matrix(c, Coupling::J3, lat);
    const auto n = static_cast<Eigen::Index>(lat.num_sites());
    Eigen::MatrixXd omega = -2.0 * m * (Eigen::MatrixXd(j3.rowwise().sum().asDiagonal()) - j);
    omega += 2.0 * h * Eigen::MatrixXd::Identity(n, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(omega);
    const Eigen::MatrixXcd v = es.eigenvectors().cast<std::complex<double>>();
    Eigen::VectorXcd ph(n);
    for (Eigen::Index i = 0; i < n; ++i) ph[i] = std::exp(I * es.eigenvalues()[i] * t);
    const Eigen::MatrixXcd u = v * ph.asDiagonal() * v.adjoint();
    return u * gamma * u.adjoint();
}

GaussianMagnonState random_state(std::mt19937& rng, std::size_t n, double m) {
    Eigen::MatrixXcd g = random_psd(rng, n);
    g /= g.trace().real();
    return {m, g, Basis::Site};
}

} // namespace

TEST(EquilibriumState, Examples) {
    const LatticeSpec lat(1, 8);
    const MagnonDynamics dyn(lat, isotropic_chain(0.5), 0.5);
    const auto zero = dyn.to_site(dyn.equilibrium_state(-0.5, std::vector<double>(8, 0.0)));
    EXPECT_EQ(max_abs(zero.gamma), 0.0);

    std::vector<double> one(8, 0.0);
    const std::size_t q0 = 3;
    one[q0] = 1.0;
    const auto s = dyn.to_site(dyn.equilibrium_state(-0.5, one));
    const double k = dyn.grid()[q0][0];
    for (int x = 0; x < 8; ++x)
        for (int y = 0; y < 8; ++y) EXPECT_LT(std::abs(s.gamma(x, y) - std::exp(-I * k * double(x - y)) / 8.0), 1e-15);
    for (double d : dyn.number_density(s)) EXPECT_NEAR(d, 1.0 / 8.0, 1e-15);

    const auto flat = dyn.to_site(dyn.equilibrium_state(-0.5, std::vector<double>(8, 0.3)));
    EXPECT_LT(max_abs(flat.gamma - 0.3 * Eigen::MatrixXcd::Identity(8, 8)), 1e-15);

    EXPECT_THROW(dyn.equilibrium_state(0.0, one), RegimeError);
    EXPECT_THROW(dyn.equilibrium_state(-0.5, std::vector<double>(3, 0.0)), InputError);
}

TEST(EquilibriumState, DensityMatchesSelfConsistencySum) {
    const LatticeSpec lat(1, 16);
    const auto c = isotropic_chain(0.5);
    const auto sol = solve_magnetization(ThermalParams(2.0, 0.5), c, MomentumGrid(lat));
    const MagnonDynamics dyn(lat, c, 0.5);
    const auto s = dyn.equilibrium_state(sol);
    double mean = 0.0;
    for (double n : sol.occupations) mean += n / 16.0;
    EXPECT_NEAR(mean, 0.5 * (1.0 + sol.m_star), 1e-12);
    for (double d : dyn.number_density(s)) EXPECT_NEAR(d, mean, 1e-15);
    for (double r : dyn.rhs_eq15(s)) EXPECT_NEAR(r, 0.0, 1e-14);
    for (double t : {0.0, 0.3, 17.0, -4.0}) EXPECT_LT(max_abs(dyn.evolve(s, t).gamma - s.gamma), 1e-14);
}

TEST(Spectrum, OmegaFormula) {
    const MagnonDynamics dyn(LatticeSpec(1, 8), isotropic_chain(0.5), 0.5);
    const auto sp = dyn.spectrum(-0.8);
    for (std::size_t q = 0; q < 8; ++q) {
        EXPECT_NEAR(sp.omega[q], 2.0 * (0.8 * dyn.symbols()[q] + 0.5), 1e-14);
        EXPECT_GT(sp.omega[q], 0.0);
    }
}

TEST(Evolve, MatchesSitePropagator) {
    std::mt19937 rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const int dim = 1 + trial % 2;
        const LatticeSpec lat(dim, dim == 1 ? 10 : 4);
        const auto c = random_even_couplings(rng, dim, 2, 0.9, true);
        const MagnonDynamics dyn(lat, c, 0.9);
        const auto s = random_state(rng, lat.num_sites(), -0.6);
        for (double t : {0.0, 0.25, 3.7}) {
            const auto e = dyn.evolve(s, t);
            EXPECT_EQ(e.basis, Basis::Site);
            EXPECT_LT(max_abs(e.gamma - site_oracle(lat, c, 0.9, -0.6, s.gamma, t)), 1e-12);
        }
        EXPECT_LT(max_abs(dyn.evolve(s, 0.0).gamma - s.gamma), 1e-15);
    }
}

TEST(Evolve, TwoModeRecurrence) {
    const LatticeSpec lat(1, 8);
    const MagnonDynamics dyn(lat, isotropic_chain(0.5), 0.5);
    const double m = -0.7;
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(8);
    v[1] = 0.6;
    v[3] = 0.8;
    const GaussianMagnonState s(m, v * v.adjoint(), Basis::Mode);
    const auto sp = dyn.spectrum(m);
    const double period = 2 * pi / std::abs(sp.omega[1] - sp.omega[3]);
    EXPECT_LT(max_abs(dyn.evolve(s, period).gamma - s.gamma), 1e-10);
    EXPECT_GT(max_abs(dyn.evolve(s, 0.5 * period).gamma - s.gamma), 0.1);
}

TEST(Evolve, ConservesNumberEnergyAndPositivity) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> ut(-50.0, 50.0);
    const LatticeSpec lat(1, 16);
    const MagnonDynamics dyn(lat, isotropic_chain(0.5), 0.5);
    for (int trial = 0; trial < 100; ++trial) {
        const auto s = random_state(rng, 16, -0.5);
        const auto e = dyn.evolve(s, ut(rng));
        EXPECT_NEAR(dyn.total_number(e), dyn.total_number(s), 1e-12);
        EXPECT_NEAR(dyn.energy(e), dyn.energy(s), 1e-12);
        EXPECT_LT(max_abs(e.gamma - e.gamma.adjoint()), 1e-14);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(e.gamma);
        EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
    }
}

TEST(NumberRate, TranslationInvariantStatesAreStationary) {
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const LatticeSpec lat(1, 12);
    const MagnonDynamics dyn(lat, chain(0.8, 0.3, 1.0), 1.0);
    std::vector<double> occ(12);
    for (auto& n : occ) n = u(rng);
    for (double r : dyn.rhs_eq15(dyn.equilibrium_state(-0.4, occ))) EXPECT_NEAR(r, 0.0, 1e-14);
    for (int trial = 0; trial < 20; ++trial) {
        const auto rates = dyn.rhs_eq15(random_state(rng, 12, -0.4));
        double sum = 0.0;
        for (double r : rates) sum += r;
        EXPECT_NEAR(sum, 0.0, 1e-13);
    }
}

TEST(NumberRate, FiniteDifferenceOrder) {
    const LatticeSpec lat(1, 32);
    const auto c = isotropic_chain(0.5);
    const MagnonDynamics dyn(lat, c, 0.5);
    const auto s = wave_packet(lat, -0.8, {10.0}, 2.0, k1(0.7), 1.0);
    EXPECT_NEAR(dyn.total_number(s), 1.0, 1e-14);
    const auto rate = dyn.rhs_eq15(s);
    std::vector<double> err;
    for (double dt : {1e-2, 1e-3, 1e-4}) {
        const auto plus = dyn.number_density(dyn.evolve(s, dt));
        const auto minus = dyn.number_density(dyn.evolve(s, -dt));
        double e = 0.0;
        for (std::size_t x = 0; x < plus.size(); ++x) e = std::max(e, std::abs((plus[x] - minus[x]) / (2 * dt) - rate[x]));
        err.push_back(e);
    }
    EXPECT_GE(std::log10(err[0] / err[1]), 1.9);
    EXPECT_GE(std::log10(err[1] / err[2]), 1.9);
    double scale = 0.0;
    for (double r : rate) scale = std::max(scale, std::abs(r));
    EXPECT_GT(scale, 1e-3);  // the packet actually moves
}

TEST(GaussianMagnonState, RejectsVanishingMagnetization) {
    EXPECT_THROW(GaussianMagnonState(0.0, Eigen::MatrixXcd::Zero(2, 2), Basis::Site), RegimeError);
    EXPECT_THROW(GaussianMagnonState(-1.5, Eigen::MatrixXcd::Zero(2, 2), Basis::Site), RegimeError);
    EXPECT_THROW(GaussianMagnonState(-0.5, Eigen::MatrixXcd::Zero(2, 3), Basis::Site), InputError);
}
