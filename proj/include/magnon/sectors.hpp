#pragma once

#include <cstdint>
#include <vector>

#include "magnon/error.hpp"

namespace magnon {

/// Total-spin sector of n spin-1/2 copies. Spins are stored doubled
/// (two_j = 2j) so half-integers stay exact.
struct SpinSector {
    int two_j = 0;
    std::uint64_t multiplicity = 0;

    int block_dim() const { return two_j + 1; }
    double j() const { return 0.5 * two_j; }
};

struct SectorTable {
    int copies = 0;
    std::vector<SpinSector> entries;  ///< descending j

    /// sum_j multiplicity(j) (2j + 1), in exact integer arithmetic.
    std::uint64_t total_dimension() const {
        std::uint64_t d = 0;
        for (const auto& e : entries) d += e.multiplicity * static_cast<std::uint64_t>(e.block_dim());
        return d;
    }
};

inline std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return r;
}

/// Decomposition of (C^2)^{(x) n} into spin-j irreducibles:
/// multiplicity(j) = C(n, n/2 - j) - C(n, n/2 - j - 1).
inline SectorTable sector_decomposition(int n) {
    if (n < 1 || n % 2 == 0) throw InputError("copy count n = 2S+1 must be odd and >= 1");
    if (n > 31) throw InputError("copy count n must be <= 31");
    SectorTable t;
    t.copies = n;
    for (int two_j = n; two_j >= 1; two_j -= 2) {
        const int k = (n - two_j) / 2;
        t.entries.push_back({two_j, binomial(n, k) - binomial(n, k - 1)});
    }
    return t;
}

} // namespace magnon
