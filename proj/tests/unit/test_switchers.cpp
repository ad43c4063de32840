#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "tvl/constructions.hpp"
#include "tvl/solvers.hpp"
#include "tvl/switchers.hpp"

using namespace tvl;

namespace {

ColouredBipartiteGraph table(int n) { return latin_to_graph(group_table(FiniteAbelianGroup::cyclic(n))); }
ColouredBipartiteGraph square(int n, std::uint64_t seed) { return latin_to_graph(random_latin_square(n, seed, 1000)); }

struct Cyc {
    int a1, a2, b1, b2;
    std::array<Edge, 4> e;  // a1b1, a2b2 | a1b2, a2b1
};

// Independent count: every unordered pair of disjoint rainbow 4-cycles, all
// four ways of taking one matching from each, kept when the two resulting
// matchings are rainbow and differ in exactly one colour each way.
std::map<std::pair<int, int>, std::uint64_t> oracle(const ColouredBipartiteGraph& g, std::uint64_t* nulls = nullptr) {
    std::vector<Cyc> cyc;
    for (int a1 = 0; a1 < g.a_size(); ++a1)
        for (int a2 = a1 + 1; a2 < g.a_size(); ++a2)
            for (int b1 = 0; b1 < g.b_size(); ++b1)
                for (int b2 = b1 + 1; b2 < g.b_size(); ++b2) {
                    if (!g.has_edge(a1, b1) || !g.has_edge(a1, b2) || !g.has_edge(a2, b1) || !g.has_edge(a2, b2))
                        continue;
                    Cyc c{a1, a2, b1, b2,
                          {Edge{a1, b1, g.colour_of(a1, b1)}, Edge{a2, b2, g.colour_of(a2, b2)},
                           Edge{a1, b2, g.colour_of(a1, b2)}, Edge{a2, b1, g.colour_of(a2, b1)}}};
                    std::set<int> cs;
                    for (auto& e : c.e) cs.insert(e.colour);
                    if (cs.size() == 4) cyc.push_back(c);
                }
    std::map<std::pair<int, int>, std::uint64_t> out;
    if (nulls) *nulls = 0;
    for (std::size_t i = 0; i < cyc.size(); ++i)
        for (std::size_t j = i + 1; j < cyc.size(); ++j) {
            const Cyc &p = cyc[i], &q = cyc[j];
            std::set<int> as{p.a1, p.a2, q.a1, q.a2}, bs{p.b1, p.b2, q.b1, q.b2};
            if (as.size() != 4 || bs.size() != 4) continue;
            for (int s1 = 0; s1 < 2; ++s1)
                for (int s2 = 0; s2 < 2; ++s2) {
                    std::multiset<int> c1, c2;
                    c1 = {p.e[2 * s1].colour, p.e[2 * s1 + 1].colour, q.e[2 * s2].colour, q.e[2 * s2 + 1].colour};
                    c2 = {p.e[2 - 2 * s1].colour, p.e[3 - 2 * s1].colour, q.e[2 - 2 * s2].colour,
                          q.e[3 - 2 * s2].colour};
                    std::set<int> u1(c1.begin(), c1.end()), u2(c2.begin(), c2.end());
                    if (u1.size() != 4 || u2.size() != 4) continue;
                    std::vector<int> only1, only2;
                    std::set_difference(u1.begin(), u1.end(), u2.begin(), u2.end(), std::back_inserter(only1));
                    std::set_difference(u2.begin(), u2.end(), u1.begin(), u1.end(), std::back_inserter(only2));
                    if (only1.empty() && only2.empty()) {
                        if (nulls) ++*nulls;
                    } else if (only1.size() == 1 && only2.size() == 1) {
                        ++out[{only1[0], only2[0]}];
                    }
                }
        }
    return out;
}

void expect_matches_oracle(const ColouredBipartiteGraph& g) {
    std::uint64_t nulls = 0;
    auto o = oracle(g, &nulls);
    auto w = weight_matrix(g);
    std::uint64_t sum = 0;
    for (auto& [cd, k] : o) {
        EXPECT_EQ(w.at(cd.first, cd.second), k);
        sum += k;
    }
    std::uint64_t ordered_total = 0;
    for (auto x : w.ordered) ordered_total += x;
    EXPECT_EQ(ordered_total, sum);
    EXPECT_EQ(2 * w.total(), sum);
    EXPECT_EQ(w.null_switchers, nulls);
}

ColouredBipartiteGraph random_partial(int n, double keep, std::uint64_t seed) {
    auto L = random_latin_square(n, seed, 200);
    std::mt19937_64 rng(seed ^ 0x9e37);
    std::bernoulli_distribution coin(keep);
    std::vector<Edge> edges;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (coin(rng)) edges.push_back({a, b, L.at(a, b)});
    return ColouredBipartiteGraph(n, n, edges);
}

}  // namespace

TEST(Enumerate, EqualColoursGiveNothing) { EXPECT_TRUE(enumerate_switchers4(table(5), 2, 2).empty()); }

// Every rainbow 4-cycle in an abelian table has equal colour sums on its two
// matchings, which forces c = d; only null pairs survive.
TEST(Enumerate, AbelianTablesOnlyHaveNullPairs) {
    for (int n = 3; n <= 9; ++n)
        for (const auto& H : abelian_groups_of_order(n)) {
            auto w = weight_matrix(latin_to_graph(group_table(H)));
            EXPECT_EQ(w.total(), 0u) << n;
            if (n >= 5) EXPECT_GT(w.null_switchers, 0u) << n;
        }
}

TEST(Enumerate, RandomOrderFiveSquaresHaveSwitchers) {
    int with = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        auto g = latin_to_graph(random_latin_square(5, s, 200));
        with += weight_matrix(g).total() > 0;
    }
    EXPECT_GT(with, 0);
}

TEST(Enumerate, EverySwitcherValid) {
    for (auto g : {table(5), table(6), latin_to_graph(random_latin_square(7, 2, 300))}) {
        SwitcherIndex idx(g);
        for (int c = 0; c < g.colour_bound(); ++c)
            for (int d = 0; d < g.colour_bound(); ++d)
                for (const auto& s : idx.between(c, d)) {
                    ASSERT_EQ(switcher_problem(g, s), "");
                    EXPECT_EQ(s.order(), 4);
                    EXPECT_EQ(s.switch_from, c);
                    EXPECT_EQ(s.switch_to, d);
                    EXPECT_EQ(shared_colours(s).size(), 3u);
                }
    }
}

TEST(Enumerate, ListMatchesVisitor) {
    auto g = latin_to_graph(random_latin_square(6, 9, 300));
    SwitcherIndex idx(g);
    std::map<std::pair<int, int>, std::vector<ColourSwitcher>> seen;
    idx.for_each([&](const RainbowCycle& q1, int s1, const RainbowCycle& q2, int s2, int from, int to, bool null) {
        if (!null) seen[{from, to}].push_back(make_switcher(q1, s1, q2, s2, from, to));
    });
    for (auto& [cd, v] : seen) {
        std::sort(v.begin(), v.end());
        EXPECT_EQ(v, idx.between(cd.first, cd.second));
    }
}

TEST(Weights, OracleOnSmallTables) {
    for (int n : {3, 4, 5, 6}) expect_matches_oracle(table(n));
    expect_matches_oracle(latin_to_graph(group_table(FiniteAbelianGroup({2, 2}))));
}

TEST(Weights, OracleOnRandomSquares) {
    for (std::uint64_t s = 0; s < 6; ++s) expect_matches_oracle(latin_to_graph(random_latin_square(6, s, 300)));
}

TEST(Weights, OracleOnPartialGraphs) {
    for (std::uint64_t s = 0; s < 10; ++s) expect_matches_oracle(random_partial(7, 0.7, s));
}

TEST(Weights, SingleColourIsEmpty) {
    ColouredBipartiteGraph g(3, 3, {{0, 0, 0}, {1, 1, 0}, {2, 2, 0}});
    auto w = weight_matrix(g);
    EXPECT_TRUE(w.nonzero().empty());
    EXPECT_EQ(w.null_switchers, 0u);
}

TEST(Weights, Z4SpotValue) {
    auto g = table(4);
    auto o = oracle(g);
    auto w = weight_matrix(g);
    EXPECT_EQ(w.at(0, 1), (o[{0, 1}]));
    EXPECT_EQ(w.at(0, 1), enumerate_switchers4(g, 0, 1).size());
}

TEST(Weights, RandomOrderEightSeedSeven) {
    auto g = latin_to_graph(random_latin_square(8, 7, 500));
    auto w = weight_matrix(g);
    EXPECT_TRUE(w.symmetric());
    auto o = oracle(g);
    std::mt19937_64 rng(7);
    for (int k = 0; k < 5; ++k) {
        int c = rng() % 8, d = rng() % 8;
        if (c == d) d = (d + 1) % 8;
        EXPECT_EQ(w.at(c, d), (o[{c, d}]));
    }
}

TEST(Weights, ParallelEqualsSerial) {
    auto g = latin_to_graph(random_latin_square(9, 1, 500));
    auto a = weight_matrix(g, 1), b = weight_matrix(g, 3);
    EXPECT_EQ(a.ordered, b.ordered);
    EXPECT_EQ(a.null_switchers, b.null_switchers);
}

TEST(Bounds, EmptyGraph) {
    auto rep = check_count_bounds(ColouredBipartiteGraph(3, 3, {}));
    EXPECT_TRUE(rep.ok());
    EXPECT_EQ(rep.switchers, 0u);
}

TEST(Bounds, Z6) {
    auto rep = check_count_bounds(table(6));
    EXPECT_TRUE(rep.ok());
    EXPECT_EQ(rep.switchers, 0u);
    EXPECT_GT(rep.null_switchers, 0u);
    EXPECT_GT(rep.max_count[0], 0u);
    EXPECT_LE(rep.max_ratio[0], 1.0);
}

TEST(Bounds, RandomOrderTen) {
    for (std::uint64_t s = 0; s < 5; ++s) {
        auto rep = check_count_bounds(latin_to_graph(random_latin_square(10, s, 500)));
        EXPECT_TRUE(rep.ok()) << s;
        for (int i = 0; i < 5; ++i) EXPECT_LE(rep.max_ratio[i], 1.0);
    }
}

TEST(Bounds, SmallGraphsCountBoundedKeys) {
    // dense counts on tiny graphs must still be below the bound
    for (int n : {2, 3, 4}) EXPECT_TRUE(check_count_bounds(table(n)).ok());
}

TEST(Compose, DegenerateRejected) {
    auto g = square(11, 1);
    auto s = enumerate_switchers4(g, 0, 1).front();
    ColourSwitcher degenerate = s;
    degenerate.switch_to = degenerate.switch_from;
    EXPECT_THROW(compose_switchers(degenerate, s), PreconditionError);
}

TEST(Compose, OrderElevenPivotComposite) {
    auto g = square(11, 1);
    SwitcherIndex idx(g);
    ColourSwitcher out;
    ASSERT_TRUE(find_chain_switcher(idx, {0, 5, 9}, {}, {}, out));
    EXPECT_EQ(out.order(), 8);
    EXPECT_EQ(out.switch_from, 0);
    EXPECT_EQ(out.switch_to, 9);
    EXPECT_EQ(switcher_problem(g, out), "");
    auto shared = shared_colours(out);
    EXPECT_TRUE(std::binary_search(shared.begin(), shared.end(), 5));
}

TEST(Compose, ChainOfThree) {
    // three order-4 switchers need 12 vertices per side and 13 colours, so
    // an order-13 square leaves almost no room; use order 18
    auto g = square(18, 1);
    SwitcherIndex idx(g);
    ColourSwitcher out;
    ASSERT_TRUE(find_chain_switcher(idx, {1, 4, 7, 11}, {}, {}, out));
    EXPECT_EQ(out.order(), 12);
    EXPECT_EQ(switcher_problem(g, out), "");
}

TEST(Compose, OverlapRefused) {
    auto g = square(11, 1);
    auto ab = enumerate_switchers4(g, 0, 1);
    auto bc = enumerate_switchers4(g, 1, 2);
    int refused = 0;
    for (const auto& x : ab)
        for (const auto& y : bc) {
            auto vx = switcher_vertices(g, x), vy = switcher_vertices(g, y);
            std::vector<int> common;
            std::set_intersection(vx.begin(), vx.end(), vy.begin(), vy.end(), std::back_inserter(common));
            if (!common.empty()) {
                EXPECT_THROW(compose_switchers(x, y), PreconditionError);
                if (++refused > 20) return;
            }
        }
}

TEST(Compose, PivotMismatch) {
    auto g = square(7, 1);
    auto a = enumerate_switchers4(g, 0, 1).front(), b = enumerate_switchers4(g, 2, 3).front();
    EXPECT_THROW(compose_switchers(a, b), PreconditionError);
}

TEST(Apply, InvolutionAndOrderSevenEmbedding) {
    auto g = square(7, 1);
    std::size_t largest = 0;
    auto list = enumerate_switchers4(g, 0, 3);
    ASSERT_FALSE(list.empty());
    for (const auto& s : list) {
        // extend s.m1 by a maximum rainbow matching on what is left, avoiding colour 3
        std::set<int> ua, ub, uc{3};
        for (const Edge& e : s.m1.edges) ua.insert(e.a), ub.insert(e.b), uc.insert(e.colour);
        std::vector<Edge> rest;
        for (const Edge& e : g.edges())
            if (!ua.count(e.a) && !ub.count(e.b) && !uc.count(e.colour)) rest.push_back(e);
        auto ext = max_rainbow_matching_exact(ColouredBipartiteGraph(7, 7, rest));
        RainbowMatching m = s.m1;
        m.edges.insert(m.edges.end(), ext.witness.edges.begin(), ext.witness.edges.end());
        std::sort(m.edges.begin(), m.edges.end());
        ASSERT_TRUE(is_rainbow_matching(g, m.edges));
        largest = std::max(largest, m.size());

        auto out = apply_switcher(m, s);
        EXPECT_TRUE(is_rainbow_matching(g, out.edges));
        EXPECT_EQ(out.size(), m.size());
        std::set<int> vin, vout, cin, cout;
        for (auto& e : m.edges) vin.insert(e.a), vin.insert(100 + e.b), cin.insert(e.colour);
        for (auto& e : out.edges) vout.insert(e.a), vout.insert(100 + e.b), cout.insert(e.colour);
        EXPECT_EQ(vin, vout);
        cin.erase(0);
        cin.insert(3);
        EXPECT_EQ(cin, cout);
        EXPECT_EQ(apply_switcher(out, reversed(s)), m);
    }
    EXPECT_GE(largest, 6u);
}

TEST(Apply, ColourAlreadyUsed) {
    auto g = square(7, 1);
    auto s = enumerate_switchers4(g, 0, 3).front();
    RainbowMatching m = s.m1;
    // add an edge of colour 3 disjoint from s
    std::set<int> ua, ub;
    for (auto& e : m.edges) ua.insert(e.a), ub.insert(e.b);
    for (const Edge& e : g.colour_class(3))
        if (!ua.count(e.a) && !ub.count(e.b)) {
            m.edges.push_back(e);
            break;
        }
    ASSERT_EQ(m.size(), 5u);
    const RainbowMatching before = m;
    EXPECT_THROW(apply_switcher(m, s), PreconditionError);
    EXPECT_EQ(m, before);
}

TEST(Apply, NotContained) {
    auto g = square(7, 1);
    auto s = enumerate_switchers4(g, 0, 3).front();
    RainbowMatching m{{s.m1.edges[0]}};
    EXPECT_THROW(apply_switcher(m, s), PreconditionError);
}

// c1 - c2 + c3 - c4 = 0 around every switcher cycle in an abelian table
TEST(PropertyP, AlternatingSumsVanish) {
    for (int n = 2; n <= 7; ++n)
        for (const auto& H : abelian_groups_of_order(n)) {
            auto g = latin_to_graph(group_table(H));
            SwitcherIndex idx(g);
            int checked = 0;
            idx.for_each([&](const RainbowCycle& q1, int, const RainbowCycle& q2, int, int, int, bool) {
                for (const RainbowCycle* q : {&q1, &q2}) {
                    auto x = H.add(H.element(q->m0[0]), H.element(q->m0[1]));
                    auto y = H.add(H.element(q->m1[0]), H.element(q->m1[1]));
                    EXPECT_EQ(x, y);
                }
                ++checked;
            });
            if (n >= 5) EXPECT_GT(checked, 0);
        }
}
