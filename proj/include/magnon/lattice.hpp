#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "magnon/error.hpp"

namespace magnon {

using IntVec = std::vector<int>;
using Momentum = std::vector<double>;

inline std::string to_string(const IntVec& v) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << ')';
    return os.str();
}

inline IntVec negate(IntVec v) {
    for (auto& c : v) c = -c;
    return v;
}

/// Periodic hypercubic torus of L^dim sites. Sites are indexed
/// lexicographically with the last component running fastest.
class LatticeSpec {
public:
    LatticeSpec(int dim, int linear_size) : dim_(dim), size_(linear_size) {
        if (dim < 1) throw InputError("lattice dimension must be >= 1");
        if (linear_size < 1) throw InputError("lattice linear size must be >= 1");
        std::size_t n = 1;
        for (int i = 0; i < dim; ++i) {
            n *= static_cast<std::size_t>(linear_size);
            if (n > (std::size_t{1} << 26)) throw InputError("lattice has too many sites");
        }
        num_sites_ = n;
    }

    int dim() const { return dim_; }
    int linear_size() const { return size_; }
    std::size_t num_sites() const { return num_sites_; }

    IntVec site(std::size_t index) const {
        IntVec x(dim_);
        for (int d = dim_ - 1; d >= 0; --d) {
            x[d] = static_cast<int>(index % size_);
            index /= size_;
        }
        return x;
    }

    int wrap(int c) const { return ((c % size_) + size_) % size_; }

    std::size_t index(const IntVec& x) const {
        if (static_cast<int>(x.size()) != dim_) throw InputError("site vector has wrong dimension");
        std::size_t idx = 0;
        for (int d = 0; d < dim_; ++d) idx = idx * size_ + static_cast<std::size_t>(wrap(x[d]));
        return idx;
    }

    /// Index of site x + z (mod L).
    std::size_t shifted(std::size_t x, const IntVec& z) const {
        IntVec v = site(x);
        for (int d = 0; d < dim_; ++d) v[d] += z[d];
        return index(v);
    }

    bool operator==(const LatticeSpec&) const = default;

private:
    int dim_;
    int size_;
    std::size_t num_sites_ = 1;
};

/// Dual lattice k = 2 pi n / L, n in {0..L-1}^dim, same ordering as sites.
/// Point 0 is k = 0.
class MomentumGrid {
public:
    explicit MomentumGrid(const LatticeSpec& lattice) : lattice_(lattice) {
        const double step = 2.0 * std::numbers::pi / lattice.linear_size();
        points_.reserve(lattice.num_sites());
        for (std::size_t i = 0; i < lattice.num_sites(); ++i) {
            IntVec n = lattice.site(i);
            Momentum k(n.size());
            for (std::size_t d = 0; d < n.size(); ++d) k[d] = step * n[d];
            points_.push_back(std::move(k));
        }
    }

    const LatticeSpec& lattice() const { return lattice_; }
    std::size_t size() const { return points_.size(); }
    const Momentum& operator[](std::size_t i) const { return points_[i]; }
    const std::vector<Momentum>& points() const { return points_; }
    IntVec label(std::size_t i) const { return lattice_.site(i); }
    std::size_t index_of(const IntVec& n) const { return lattice_.index(n); }

    /// Index of -k (mod 2 pi).
    std::size_t negated(std::size_t i) const { return lattice_.index(negate(lattice_.site(i))); }

private:
    LatticeSpec lattice_;
    std::vector<Momentum> points_;
};

struct CouplingPair {
    double j = 0.0;
    double j3 = 0.0;
    bool operator==(const CouplingPair&) const = default;
};

enum class Coupling { J, J3 };

/// Translation-invariant exchange couplings keyed by displacement, plus the
/// field h. Evenness J(z) = J(-z), J3(z) = J3(-z) holds for every stored
/// entry and J(0) = J3(0) = 0.
class CouplingSet {
public:
    using Map = std::map<IntVec, CouplingPair>;

    CouplingSet(int dim, Map entries, double h) : dim_(dim), entries_(std::move(entries)), h_(h) {
        if (dim < 1) throw InputError("coupling dimension must be >= 1");
        if (!std::isfinite(h) || h < 0.0) throw InputError("field h must be finite and >= 0");
        for (const auto& [z, c] : entries_) {
            if (static_cast<int>(z.size()) != dim_)
                throw InputError("displacement " + to_string(z) + " has wrong dimension");
            if (!std::isfinite(c.j) || !std::isfinite(c.j3))
                throw InputError("non-finite coupling at " + to_string(z));
            const bool origin = std::all_of(z.begin(), z.end(), [](int v) { return v == 0; });
            if (origin && (c.j != 0.0 || c.j3 != 0.0))
                throw InputError("on-site couplings J(0), J3(0) must vanish");
            auto mirror = entries_.find(negate(z));
            if (mirror == entries_.end())
                throw InputError("coupling at " + to_string(z) + " has no mirror at " + to_string(negate(z)));
            if (!(mirror->second == c))
                throw InputError("couplings at " + to_string(z) + " and its mirror differ");
        }
    }

    /// Inserts missing mirror entries -z. Conflicting values for z and -z
    /// are rejected.
    static CouplingSet symmetrized(int dim, Map entries, double h) {
        Map full = entries;
        for (const auto& [z, c] : entries) {
            auto [it, inserted] = full.emplace(negate(z), c);
            if (!inserted && !(it->second == c))
                throw InputError("couplings at " + to_string(z) + " and its mirror differ");
        }
        return CouplingSet(dim, std::move(full), h);
    }

    int dim() const { return dim_; }
    double field() const { return h_; }
    const Map& entries() const { return entries_; }

    CouplingSet with_field(double h) const { return CouplingSet(dim_, entries_, h); }

    /// Largest Euclidean displacement norm carrying a nonzero coupling.
    double range() const {
        double r = 0.0;
        for (const auto& [z, c] : entries_) {
            if (c.j == 0.0 && c.j3 == 0.0) continue;
            double s = 0.0;
            for (int v : z) s += double(v) * v;
            r = std::max(r, std::sqrt(s));
        }
        return r;
    }

    double value(const CouplingPair& c, Coupling which) const { return which == Coupling::J ? c.j : c.j3; }

private:
    int dim_;
    Map entries_;
    double h_;
};

/// Couplings J(+-e_d) = j, J3(+-e_d) = j3 along every lattice axis.
inline CouplingSet nearest_neighbor_couplings(int dim, double j, double j3, double h) {
    CouplingSet::Map m;
    for (int d = 0; d < dim; ++d) {
        IntVec z(dim, 0);
        z[d] = 1;
        m[z] = {j, j3};
        m[negate(z)] = {j, j3};
    }
    return CouplingSet(dim, std::move(m), h);
}

/// Sum_z J(z) exp(-i k.z). Real by evenness.
inline double fourier_coupling(const CouplingSet& c, Coupling which, const Momentum& k) {
    if (static_cast<int>(k.size()) != c.dim()) throw InputError("momentum has wrong dimension");
    double re = 0.0, im = 0.0, scale = 0.0;
    for (const auto& [z, pair] : c.entries()) {
        const double v = c.value(pair, which);
        if (v == 0.0) continue;
        double phase = 0.0;
        for (std::size_t d = 0; d < k.size(); ++d) phase += k[d] * z[d];
        re += v * std::cos(phase);
        im -= v * std::sin(phase);
        scale += std::abs(v);
    }
    if (std::abs(im) > 1e-12 * std::max(1.0, scale))
        throw std::logic_error("fourier_coupling: imaginary residue on an even coupling map");
    return re;
}

/// Fourier symbol of D(x,y) = lambda(x) delta(x,y) - J(x,y): J3(0) - J(k).
inline double d_of_q(const CouplingSet& c, const Momentum& k) {
    const Momentum zero(k.size(), 0.0);
    return fourier_coupling(c, Coupling::J3, zero) - fourier_coupling(c, Coupling::J, k);
}

/// Couplings placed on the torus, summing periodic images:
/// M(x,y) = sum_z J(z) [x + z == y mod L].
inline Eigen::MatrixXd lattice_coupling_matrix(const CouplingSet& c, Coupling which, const LatticeSpec& lattice) {
    if (c.dim() != lattice.dim()) throw InputError("coupling and lattice dimensions differ");
    const std::size_t n = lattice.num_sites();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [z, pair] : c.entries()) {
        const double v = c.value(pair, which);
        if (v == 0.0) continue;
        if (lattice.shifted(0, z) == 0)
            throw InputError("displacement " + to_string(z) + " wraps onto the same site for L=" +
                             std::to_string(lattice.linear_size()));
        for (std::size_t x = 0; x < n; ++x) m(x, lattice.shifted(x, z)) += v;
    }
    return m;
}

struct ValidationReport {
    std::vector<double> d_values; ///< D(q) in grid order
    double d0 = 0.0;
    double min_d = 0.0;
    std::size_t argmin = 0;
    Momentum argmin_momentum;
    double field = 0.0;
    bool gap_ok = false;
    bool field_ok_strict = false;
    bool field_ok_relaxed = false;
    std::vector<std::string> messages;

    bool ferromagnetic() const { return gap_ok && field_ok_relaxed; }
};

inline ValidationReport validate_ferromagnetic(const CouplingSet& c, const MomentumGrid& grid, double tol = 1e-12) {
    if (!(tol >= 0.0)) throw InputError("validation tolerance must be >= 0");
    ValidationReport r;
    r.field = c.field();
    r.d_values.reserve(grid.size());
    for (const auto& k : grid.points()) r.d_values.push_back(d_of_q(c, k));
    r.d0 = r.d_values.front();
    auto it = std::min_element(r.d_values.begin(), r.d_values.end());
    r.argmin = static_cast<std::size_t>(it - r.d_values.begin());
    r.min_d = *it;
    r.argmin_momentum = grid[r.argmin];

    const double h = c.field();
    r.gap_ok = r.min_d >= -tol;
    r.field_ok_strict = h > r.d0 && r.d0 > 0.0;
    r.field_ok_relaxed = h > std::max(r.d0, 0.0);

    std::ostringstream os;
    os.precision(17);
    os << "min D(q) = " << r.min_d << " at n = " << to_string(grid.label(r.argmin));
    r.messages.push_back(os.str());
    if (!r.gap_ok) r.messages.push_back("D(q) is negative: the D matrix is not positive semidefinite");
    if (!r.field_ok_relaxed) r.messages.push_back("field does not exceed max(D(0), 0)");
    else if (!r.field_ok_strict)
        r.messages.push_back("D(0) <= 0: strict condition h > D(0) > 0 fails, relaxed condition holds");
    return r;
}

} // namespace magnon
