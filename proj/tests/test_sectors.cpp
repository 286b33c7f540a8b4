#include <map>

#include <gtest/gtest.h>

#include "magnon/sectors.hpp"

using namespace magnon;

namespace {

// Multiplicities by coupling one spin-1/2 at a time: j -> j +- 1/2.
std::map<int, std::uint64_t> coupled_multiplicities(int n) {
    std::map<int, std::uint64_t> m{{1, 1}};
    for (int k = 2; k <= n; ++k) {
        std::map<int, std::uint64_t> next;
        for (auto [two_j, mult] : m) {
            next[two_j + 1] += mult;
            if (two_j > 0) next[two_j - 1] += mult;
        }
        m = next;
    }
    return m;
}

} // namespace

TEST(SectorDecomposition, SmallTables) {
    const auto t1 = sector_decomposition(1);
    ASSERT_EQ(t1.entries.size(), 1u);
    EXPECT_EQ(t1.entries[0].two_j, 1);
    EXPECT_EQ(t1.entries[0].multiplicity, 1u);

    const auto t3 = sector_decomposition(3);
    ASSERT_EQ(t3.entries.size(), 2u);
    EXPECT_EQ(t3.entries[0].two_j, 3);
    EXPECT_EQ(t3.entries[0].multiplicity, 1u);
    EXPECT_EQ(t3.entries[1].two_j, 1);
    EXPECT_EQ(t3.entries[1].multiplicity, 2u);
    EXPECT_EQ(t3.total_dimension(), 8u);

    const auto t5 = sector_decomposition(5);
    ASSERT_EQ(t5.entries.size(), 3u);
    EXPECT_EQ(t5.entries[1].multiplicity, 4u);
    EXPECT_EQ(t5.entries[2].multiplicity, 5u);
    EXPECT_EQ(t5.total_dimension(), 32u);
}

TEST(SectorDecomposition, DimensionIdentityUpTo31) {
    for (int n = 1; n <= 31; n += 2) EXPECT_EQ(sector_decomposition(n).total_dimension(), std::uint64_t{1} << n) << n;
}

TEST(SectorDecomposition, MatchesSequentialCoupling) {
    for (int n = 1; n <= 15; n += 2) {
        const auto ref = coupled_multiplicities(n);
        const auto t = sector_decomposition(n);
        ASSERT_EQ(t.entries.size(), ref.size());
        for (const auto& e : t.entries) EXPECT_EQ(e.multiplicity, ref.at(e.two_j));
    }
}

TEST(SectorDecomposition, RejectsBadCopyCounts) {
    EXPECT_THROW(sector_decomposition(0), InputError);
    EXPECT_THROW(sector_decomposition(4), InputError);
    EXPECT_THROW(sector_decomposition(33), InputError);
}
