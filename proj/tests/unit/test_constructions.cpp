#include <gtest/gtest.h>

#include <array>
#include <map>

#include "tvl/constructions.hpp"
#include "tvl/solvers.hpp"

using namespace tvl;

namespace {
LatinArray cyclic(int n) { return group_table(FiniteAbelianGroup::cyclic(n)); }
}  // namespace

TEST(GroupTable, Trivial) { EXPECT_EQ(group_table(FiniteAbelianGroup::cyclic(1)), LatinArray({{0}})); }

TEST(GroupTable, Z2) { EXPECT_EQ(cyclic(2), LatinArray({{0, 1}, {1, 0}})); }

TEST(GroupTable, KleinFourHasFullTransversal) {
    auto L = group_table(FiniteAbelianGroup({2, 2}));
    EXPECT_TRUE(L.is_latin_square());
    auto r = max_rainbow_matching_exact(latin_to_graph(L));
    EXPECT_EQ(r.size, 4);
    EXPECT_TRUE(r.optimal);
}

TEST(AbelianGroups, EnumerationCounts) {
    // number of abelian groups of order n
    std::map<int, std::size_t> expect{{1, 1}, {2, 1}, {4, 2}, {8, 3}, {12, 2}, {16, 5}, {9, 2}, {6, 1}, {36, 4}};
    for (auto [n, k] : expect) EXPECT_EQ(abelian_groups_of_order(n).size(), k) << n;
}

TEST(Maillet, DegenerateBlowupIsBaseTable) {
    MailletSpec spec{FiniteAbelianGroup::cyclic(2), 1, {}};
    EXPECT_EQ(maillet_blowup(spec), cyclic(2));
}

TEST(Maillet, OddBlocksOverZ2HaveNoFullTransversal) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        MailletSpec spec{FiniteAbelianGroup::cyclic(2), 3, random_inner_blocks(FiniteAbelianGroup::cyclic(2), 3, seed)};
        auto L = maillet_blowup(spec);
        ASSERT_EQ(L.order(), 6);
        ASSERT_TRUE(L.is_latin_square());
        auto r = max_rainbow_matching_exact(latin_to_graph(L));
        EXPECT_TRUE(r.optimal);
        EXPECT_EQ(r.size, 5);
    }
}

TEST(Maillet, CyclicBlocksDefault) {
    auto L = maillet_blowup({FiniteAbelianGroup::cyclic(2), 3, {}});
    EXPECT_EQ(L.at(0, 0), 0);
    EXPECT_EQ(L.at(1, 2), 0);  // (1 + 2) mod 3 in block C_0
    EXPECT_EQ(L.at(0, 3), 3);  // block C_1 starts at 3
}

TEST(Maillet, RejectsImproperInnerBlock) {
    std::vector<LatinArray> blocks(4, LatinArray({{0, 1}, {1, 0}}));
    blocks[2] = LatinArray({{0, kEmpty}, {kEmpty, 0}});
    EXPECT_THROW(maillet_blowup({FiniteAbelianGroup::cyclic(2), 2, blocks}), PreconditionError);
}

TEST(Maillet, MaxTransversalIsNMinusOneWhenObstructed) {
    // n <= 8 with m * sum != 0
    struct Case {
        std::vector<int> factors;
        int m;
    };
    for (Case c : {Case{{2}, 1}, Case{{2}, 3}, Case{{4}, 1}, Case{{4}, 2}, Case{{8}, 1}, Case{{2}, 1}}) {
        FiniteAbelianGroup H(c.factors);
        auto obs = group_sum_obstruction(H, c.m);
        auto L = maillet_blowup({H, c.m, {}});
        auto r = max_rainbow_matching_exact(latin_to_graph(L));
        bool nonzero = obs != H.identity();
        if (nonzero) {
            EXPECT_EQ(r.size, L.order() - 1);
        }
    }
}

TEST(GroupSum, Examples) {
    EXPECT_EQ(group_sum_obstruction(FiniteAbelianGroup::cyclic(3), 1), GroupElement{0});
    EXPECT_EQ(group_sum_obstruction(FiniteAbelianGroup::cyclic(2), 1), GroupElement{1});
    EXPECT_EQ(group_sum_obstruction(FiniteAbelianGroup::cyclic(4), 1), GroupElement{2});
    EXPECT_EQ(group_sum_obstruction(FiniteAbelianGroup({2, 2}), 1), (GroupElement{0, 0}));
    EXPECT_EQ(group_sum_obstruction(FiniteAbelianGroup::cyclic(2), 3), GroupElement{1});
    EXPECT_EQ(group_sum_obstruction(FiniteAbelianGroup::cyclic(2), 2), GroupElement{0});
}

TEST(RandomLatin, OrderOne) {
    for (std::uint64_t s : {0ull, 1ull, 99ull}) EXPECT_EQ(random_latin_square(1, s, 10), LatinArray({{0}}));
}

TEST(RandomLatin, ValidAndDeterministic) {
    for (std::uint64_t s = 0; s < 20; ++s) {
        auto L = random_latin_square(4, s, 100);
        EXPECT_TRUE(L.is_latin_square());
        EXPECT_EQ(L, random_latin_square(4, s, 100));
    }
    EXPECT_TRUE(random_latin_square(12, 3, 2000).is_latin_square());
}

TEST(RandomLatin, MarginalsNearUniform) {
    const int n = 5, samples = 100000;
    std::vector<std::array<int, 5>> freq(n * n);
    for (auto& f : freq) f.fill(0);
    for (int s = 0; s < samples; ++s) {
        auto L = random_latin_square(n, static_cast<std::uint64_t>(s), 200);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) freq[r * n + c][L.at(r, c)]++;
    }
    double worst = 0;
    for (auto& f : freq)
        for (int k : f) worst = std::max(worst, std::abs(k / double(samples) - 0.2));
    EXPECT_LE(worst, 0.02);
}

TEST(CompleteMapping, Examples) {
    EXPECT_TRUE(complete_mapping_exists(FiniteAbelianGroup::cyclic(3)).exists);
    EXPECT_FALSE(complete_mapping_exists(FiniteAbelianGroup::cyclic(2)).exists);
    EXPECT_FALSE(complete_mapping_exists(FiniteAbelianGroup::cyclic(4)).exists);
    EXPECT_FALSE(complete_mapping_exists(FiniteAbelianGroup::cyclic(6)).exists);
    EXPECT_TRUE(complete_mapping_exists(FiniteAbelianGroup({2, 2})).exists);
    EXPECT_TRUE(complete_mapping_exists(FiniteAbelianGroup({2, 4})).exists);
}

TEST(CompleteMapping, WitnessIsTransversal) {
    auto H = FiniteAbelianGroup({3, 3});
    auto r = complete_mapping_exists(H);
    ASSERT_TRUE(r.exists);
    ASSERT_TRUE(r.witness.has_value());
    auto L = group_table(H);
    std::set<int> rows, cols, syms;
    for (auto [x, y] : r.witness->cells) rows.insert(x), cols.insert(y), syms.insert(L.at(x, y));
    EXPECT_EQ(rows.size(), 9u);
    EXPECT_EQ(cols.size(), 9u);
    EXPECT_EQ(syms.size(), 9u);
}

TEST(CompleteMapping, CapExceeded) {
    EXPECT_THROW(complete_mapping_exists(FiniteAbelianGroup::cyclic(17)), PreconditionError);
    EXPECT_THROW(complete_mapping_exists(FiniteAbelianGroup::cyclic(9), 8), PreconditionError);
}

TEST(CompleteMapping, HallPaigeUpToTwelve) {
    for (int n = 1; n <= 12; ++n)
        for (const auto& H : abelian_groups_of_order(n)) {
            bool sum_zero = group_sum_obstruction(H, 1) == H.identity();
            EXPECT_EQ(complete_mapping_exists(H).exists, H.sylow2_trivial_or_noncyclic()) << n;
            EXPECT_EQ(sum_zero, H.sylow2_trivial_or_noncyclic()) << n;
        }
}

TEST(PropertyP, GroupTablesUpToEight) {
    for (int n = 1; n <= 8; ++n)
        for (const auto& H : abelian_groups_of_order(n)) EXPECT_TRUE(has_property_p(latin_to_graph(group_table(H))));
}

TEST(PropertyP, FailsOnMailletWithNonCyclicInner) {
    // inner blocks that are not group-compatible break the closing rule
    auto blocks = random_inner_blocks(FiniteAbelianGroup::cyclic(2), 4, 11);
    blocks[0] = LatinArray({{0, 1, 2, 3}, {1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}});
    blocks[1] = LatinArray({{0, 1, 2, 3}, {1, 2, 3, 0}, {2, 3, 0, 1}, {3, 0, 1, 2}});
    auto L = maillet_blowup({FiniteAbelianGroup::cyclic(2), 4, blocks});
    EXPECT_FALSE(has_property_p(latin_to_graph(L)));
}
