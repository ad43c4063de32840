#include <gtest/gtest.h>

#include <bit>
#include <numeric>
#include <random>
#include <set>

#include "tvl/absorption.hpp"
#include "tvl/constructions.hpp"
#include "tvl/errors.hpp"

using namespace tvl;

namespace {

ColouredBipartiteGraph table(int n) { return latin_to_graph(group_table(FiniteAbelianGroup::cyclic(n))); }

std::vector<int> ends(const ColouredBipartiteGraph& g, const Edge& e) { return {e.a, flat_b(g, e.b)}; }

std::set<int> state_vertices(const ColouredBipartiteGraph& g, const AdditionState& s) {
    std::set<int> v;
    for (const auto* m : {&s.m_id, &s.m_rb})
        for (const Edge& e : *m) v.insert(e.a), v.insert(flat_b(g, e.b));
    v.insert(s.rem_a);
    v.insert(flat_b(g, s.rem_b));
    return v;
}

std::pair<int, int> fresh_pair(const ColouredBipartiteGraph& g, const AdditionState& s, std::mt19937_64& rng) {
    auto used = state_vertices(g, s);
    std::vector<int> as, bs;
    for (int a = 0; a < g.a_size(); ++a)
        if (!used.count(a)) as.push_back(a);
    for (int b = 0; b < g.b_size(); ++b)
        if (!used.count(flat_b(g, b))) bs.push_back(b);
    return {as[rng() % as.size()], bs[rng() % bs.size()]};
}

}  // namespace

TEST(ExactCover, FindsAndRejects) {
    auto g = table(5);
    // the whole table with every colour is a full transversal problem
    std::vector<int> all(10);
    std::iota(all.begin(), all.end(), 0);
    auto m = exact_rainbow_cover(g, all, {0, 1, 2, 3, 4});
    ASSERT_TRUE(m.has_value());
    EXPECT_TRUE(is_rainbow_matching(g, *m));
    EXPECT_EQ(m->size(), 5u);
    // Z_4 has no transversal
    auto g4 = table(4);
    std::vector<int> all4(8);
    std::iota(all4.begin(), all4.end(), 0);
    EXPECT_FALSE(exact_rainbow_cover(g4, all4, {0, 1, 2, 3}).has_value());
    EXPECT_FALSE(exact_rainbow_cover(g, {0, 5}, {0, 1}).has_value());  // unbalanced
    EXPECT_TRUE(exact_rainbow_cover(g, {}, {})->empty());
    EXPECT_THROW(exact_rainbow_cover(g, {0, 0}, {0}), PreconditionError);
}

TEST(EdgeSwitcher, GroupTableSevenEveryPair) {
    auto g = table(7);
    for (int c = 0; c < 7; ++c) {
        const auto& cls = g.colour_class(c);
        for (std::size_t i = 0; i < cls.size(); ++i)
            for (std::size_t j = 0; j < cls.size(); ++j) {
                if (i == j) continue;
                auto s = build_edge_switcher(g, cls[i], cls[j]);
                EXPECT_EQ(s.order(), 3);
                EXPECT_FALSE(s.patched);
                EXPECT_EQ(s.vertices.size(), 4u);
                EXPECT_EQ(edge_switcher_problem(g, s), "");
                EXPECT_TRUE(is_rainbow_matching(g, s.cover_e));
                EXPECT_TRUE(is_rainbow_matching(g, s.cover_f));
            }
    }
}

TEST(EdgeSwitcher, AvoidsForbiddenSets) {
    auto g = table(31);
    const auto& cls = g.colour_class(4);
    std::mt19937_64 rng(3);
    for (int t = 0; t < 100; ++t) {
        SwitcherSearch s;
        s.seed = t;
        std::vector<int> v(g.vertex_count());
        std::iota(v.begin(), v.end(), 0);
        std::shuffle(v.begin(), v.end(), rng);
        v.resize(g.vertex_count() / 10);
        s.forbidden_vertices = v;
        auto sw = build_edge_switcher(g, cls[0], cls[7], s);
        EXPECT_LE(sw.order(), 4);
        for (int x : sw.vertices) EXPECT_EQ(std::count(v.begin(), v.end(), x), 0);
        EXPECT_EQ(edge_switcher_problem(g, sw), "");
    }
}

TEST(EdgeSwitcher, RandomSquareSwitchersValidate) {
    auto g = latin_to_graph(random_latin_square(13, 2, 1000));
    int built = 0;
    for (int c : {0, 3, 6}) {
        const auto& cls = g.colour_class(c);
        for (std::size_t j = 1; j < cls.size(); j += 3) {
            try {
                auto s = build_edge_switcher(g, cls[0], cls[j]);
                EXPECT_EQ(edge_switcher_problem(g, s), "");
                EXPECT_LE(s.order(), 7);
                ++built;
            } catch (const SearchExhausted&) {
            }
        }
    }
    EXPECT_GT(built, 0);
}

TEST(EdgeSwitcher, PatchedThroughColourSwitcher) {
    // three colours forbidden push some pairs past the direct construction
    auto g = latin_to_graph(random_latin_square(12, 0, 1000));
    int patched = 0;
    for (int c = 0; c < 12; ++c) {
        const auto& cls = g.colour_class(c);
        for (std::size_t j = 1; j < cls.size(); ++j) {
            SwitcherSearch s;
            s.forbidden_colours = {(c + 1) % 12, (c + 2) % 12, (c + 3) % 12};
            auto sw = build_edge_switcher(g, cls[0], cls[j], s);
            EXPECT_EQ(edge_switcher_problem(g, sw), "");
            for (int x : s.forbidden_colours) EXPECT_EQ(std::count(sw.colours.begin(), sw.colours.end(), x), 0);
            if (sw.patched) {
                ++patched;
                EXPECT_EQ(sw.order(), 7);
                EXPECT_EQ(sw.vertices.size(), 12u);
            }
        }
    }
    EXPECT_GT(patched, 0);
}

TEST(EdgeSwitcher, Preconditions) {
    auto g = table(7);
    const auto& cls = g.colour_class(1);
    EXPECT_THROW(build_edge_switcher(g, cls[0], cls[0]), PreconditionError);
    EXPECT_THROW(build_edge_switcher(g, cls[0], g.colour_class(2)[3]), PreconditionError);
    Edge bogus{0, 0, 5};
    EXPECT_THROW(build_edge_switcher(g, bogus, cls[2]), PreconditionError);
}

TEST(EdgeSwitcher, ProblemDetectsTampering) {
    auto g = table(7);
    const auto& cls = g.colour_class(2);
    auto s = build_edge_switcher(g, cls[0], cls[3]);
    auto bad = s;
    bad.colours[0] = (bad.colours[0] + 1) % 7;
    while (std::count(s.colours.begin(), s.colours.end(), bad.colours[0])) bad.colours[0] = (bad.colours[0] + 1) % 7;
    std::sort(bad.colours.begin(), bad.colours.end());
    EXPECT_NE(edge_switcher_problem(g, bad), "");
    bad = s;
    bad.vertices.pop_back();
    EXPECT_NE(edge_switcher_problem(g, bad), "");
}

TEST(Switchable, BetaZeroSingleTrial) {
    auto g = table(7);
    const auto& cls = g.colour_class(0);
    auto rep = verify_switchable(g, cls[1], cls[4], 0.0, 3, 1, 0);
    EXPECT_EQ(rep.forbidden_size, 0u);
    EXPECT_TRUE(rep.all_passed());
    EXPECT_EQ(rep.orders, std::vector<int>{3});
}

TEST(Switchable, Z31FullPass) {
    auto g = table(31);
    const auto& cls = g.colour_class(9);
    auto rep = verify_switchable(g, cls[2], cls[20], 0.1, 4, 100, 5);
    EXPECT_EQ(rep.forbidden_size, 6u);
    EXPECT_EQ(rep.passes, 100);
    EXPECT_TRUE(rep.certificates.empty());
}

TEST(Switchable, SparseHostFailsWithCertificate) {
    // two parallel colour-0 edges plus a few pendant colours: no corners close up
    ColouredBipartiteGraph g(4, 4, {{0, 0, 0}, {1, 1, 0}, {0, 2, 1}, {2, 0, 2}, {1, 3, 1}, {3, 1, 2}});
    auto rep = verify_switchable(g, {0, 0, 0}, {1, 1, 0}, 0.0, 7, 3, 1);
    EXPECT_EQ(rep.passes, 0);
    ASSERT_EQ(rep.certificates.size(), 3u);
    EXPECT_NE(rep.certificates[0].find("edge_switcher"), std::string::npos);
    EXPECT_THROW(build_edge_switcher(g, {0, 0, 0}, {1, 1, 0}), SearchExhausted);
}

TEST(Absorber, SingleTarget) {
    auto g = table(7);
    Edge e = g.colour_class(0)[2];
    auto a = build_absorber(g, {e});
    EXPECT_EQ(a.order(), 2);
    EXPECT_EQ(a.vertices.size(), 2u);
    ASSERT_EQ(a.covers.size(), 1u);
    EXPECT_TRUE(is_rainbow_matching(g, a.covers[0]));
    EXPECT_EQ(absorber_problem(g, a), "");
}

TEST(Absorber, Z31FiveTargets) {
    auto g = table(31);
    const auto& cls = g.colour_class(0);
    std::vector<Edge> tg(cls.begin(), cls.begin() + kDefaultFanIn);
    auto a = build_absorber(g, tg);
    EXPECT_EQ(a.vertices.size(), 2 * a.colours.size() - 2);
    EXPECT_EQ(a.order(), 2 + 3 * 5);  // d, d' and five order-3 switchers
    EXPECT_EQ(std::count(a.colours.begin(), a.colours.end(), 0), 0);
    ASSERT_EQ(a.covers.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_TRUE(is_rainbow_matching(g, a.covers[i]));
        std::vector<int> want = a.vertices, got;
        for (int v : ends(g, tg[i])) want.push_back(v);
        for (const Edge& e : a.covers[i]) got.push_back(e.a), got.push_back(flat_b(g, e.b));
        std::sort(want.begin(), want.end());
        std::sort(got.begin(), got.end());
        EXPECT_EQ(got, want);
    }
    EXPECT_EQ(absorber_problem(g, a, 3), "");
    auto j = to_json(a);
    EXPECT_EQ(j["vertices"].size(), a.vertices.size());
    EXPECT_EQ(j["targets"].size(), 5u);
}

TEST(Absorber, AnchorlessIsOneSwitcherSmaller) {
    auto g = table(31);
    const auto& cls = g.colour_class(3);
    std::vector<Edge> tg(cls.begin(), cls.begin() + 4);
    AbsorberOptions o;
    o.anchor = false;
    auto a = build_absorber(g, tg, o);
    EXPECT_EQ(a.order(), 2 + 3 * 3);
    EXPECT_EQ(absorber_problem(g, a), "");
}

TEST(Absorber, ForbiddenColoursExhaust) {
    auto g = table(31);
    const auto& cls = g.colour_class(0);
    std::vector<Edge> tg(cls.begin(), cls.begin() + 5);
    AbsorberOptions o;
    for (int c = 1; c < 31; ++c) o.forbidden_colours.push_back(c);
    try {
        build_absorber(g, tg, o);
        FAIL() << "expected exhaustion";
    } catch (const SearchExhausted& ex) {
        EXPECT_EQ(ex.stage(), "absorber/cycles");
    }
}

TEST(Absorber, Preconditions) {
    auto g = table(11);
    const auto& c0 = g.colour_class(0);
    EXPECT_THROW(build_absorber(g, {}), PreconditionError);
    EXPECT_THROW(build_absorber(g, {c0[0], g.colour_class(1)[3]}), PreconditionError);
    EXPECT_THROW(build_absorber(g, {c0[0], c0[0]}), PreconditionError);
}

TEST(Template, HThree) {
    auto k = build_template(3, 0);
    EXPECT_EQ(k.y_size(), 2);
    EXPECT_EQ(k.z_size(), 2);
    EXPECT_EQ(template_problem(k), "");
    for (int z = 0; z < 2; ++z) {
        auto m = template_matching(k, {z});
        ASSERT_TRUE(m.has_value());
        std::set<int> hit(m->begin(), m->end());
        EXPECT_EQ(hit, (std::set<int>{0, 1, 2 + z}));
    }
}

TEST(Template, NineAndTwelveExhaustive) {
    for (int h : {9, 12}) {
        auto k = build_template(h, 7);
        EXPECT_EQ(template_problem(k), "") << h;
        EXPECT_LE(k.max_degree(), kAsymptoticFanIn);
        const int zs = k.z_size();
        int subsets = 0;
        for (std::uint32_t mask = 0; mask < (1u << zs); ++mask) {
            if (std::popcount(mask) != h / 3) continue;
            std::vector<int> z0;
            for (int z = 0; z < zs; ++z)
                if (mask >> z & 1) z0.push_back(z);
            auto m = template_matching(k, z0);
            ASSERT_TRUE(m.has_value());
            std::set<int> hit(m->begin(), m->end());
            EXPECT_EQ(hit.size(), static_cast<std::size_t>(h));
            for (int x = 0; x < h; ++x)
                EXPECT_TRUE(std::count(k.adj[x].begin(), k.adj[x].end(), (*m)[x]));
            ++subsets;
        }
        EXPECT_EQ(subsets, h == 9 ? 20 : 70);
    }
}

TEST(Template, PruningKeepsPropertyAndMinimality) {
    auto k = build_template(9, 3);
    // every remaining edge is needed
    for (int x = 0; x < 9; ++x)
        for (std::size_t i = 0; i < k.adj[x].size(); ++i) {
            if (k.adj[x].size() == 1) continue;
            auto copy = k;
            copy.adj[x].erase(copy.adj[x].begin() + static_cast<std::ptrdiff_t>(i));
            EXPECT_NE(template_problem(copy), "");
        }
}

TEST(Template, BrokenTemplateReported) {
    RobustTemplate k;
    k.h = 3;
    k.adj = {{0}, {1}, {2}};  // only Z node 0 reachable
    EXPECT_NE(template_problem(k), "");
    EXPECT_FALSE(template_matching(k, {1}).has_value());
    TemplateOptions o;
    o.degree = 1;
    o.attempts = 3;
    EXPECT_THROW(build_template(9, 1, o), SearchExhausted);
    EXPECT_THROW(build_template(4, 1), PreconditionError);
    EXPECT_THROW(build_template(18, 1), PreconditionError);
}

TEST(Distributive, Z67ThreeChooseTwo) {
    auto g = table(67);
    const auto& cls = g.colour_class(0);
    std::vector<Edge> E(cls.begin(), cls.begin() + 3);
    auto k = build_template(9, 1);
    DistributiveOptions o;
    o.seed = 4;
    auto d = distributive_absorber(g, E, 2, k, o);
    EXPECT_EQ(d.vertices.size(), 2 * d.colours.size() - 4);
    EXPECT_EQ(d.edges_y.size(), 6u);
    EXPECT_EQ(d.edges_z.size(), 4u);
    for (const Edge& e : E)
        for (int v : ends(g, e)) EXPECT_FALSE(std::binary_search(d.vertices.begin(), d.vertices.end(), v));
    int checked = 0;
    for (int skip = 0; skip < 3; ++skip) {
        std::vector<Edge> pick;
        for (int i = 0; i < 3; ++i)
            if (i != skip) pick.push_back(E[i]);
        auto m = d.absorb(pick);
        EXPECT_TRUE(is_rainbow_matching(g, m));
        EXPECT_EQ(m.size(), d.colours.size());
        ++checked;
    }
    EXPECT_EQ(checked, 3);
    EXPECT_EQ(distributive_problem(g, d, 2), "");
    EXPECT_THROW(d.absorb({E[0]}), PreconditionError);
    EXPECT_THROW(d.absorb({E[0], cls[10]}), PreconditionError);
}

TEST(Distributive, SingleEdgeDegenerates) {
    auto g = table(31);
    Edge e = g.colour_class(5)[0];
    auto d = distributive_absorber(g, {e}, 1, build_template(3, 2));
    EXPECT_EQ(d.vertices.size(), 2 * d.colours.size() - 2);
    auto m = d.absorb({e});
    EXPECT_TRUE(is_rainbow_matching(g, m));
    EXPECT_EQ(distributive_problem(g, d), "");
}

TEST(Distributive, MZeroSelfCompletes) {
    auto g = table(67);
    const auto& cls = g.colour_class(0);
    std::vector<Edge> E(cls.begin() + 5, cls.begin() + 7);
    auto d = distributive_absorber(g, E, 0, build_template(9, 5));
    EXPECT_EQ(d.vertices.size(), 2 * d.colours.size());
    auto m = d.absorb({});
    EXPECT_EQ(m.size(), d.colours.size());
    EXPECT_TRUE(is_rainbow_matching(g, m));
    EXPECT_EQ(distributive_problem(g, d), "");
}

TEST(Distributive, Preconditions) {
    auto g = table(31);
    const auto& cls = g.colour_class(0);
    std::vector<Edge> E(cls.begin(), cls.begin() + 5);
    auto k = build_template(3, 0);
    EXPECT_THROW(distributive_absorber(g, E, 1, k), PreconditionError);  // m1 - m0 > h/3
    EXPECT_THROW(distributive_absorber(g, E, 6, k), PreconditionError);
    RobustTemplate broken;
    broken.h = 3;
    broken.adj = {{0}, {1}, {2}};
    EXPECT_THROW(distributive_absorber(g, {E[0]}, 1, broken), PreconditionError);
}

TEST(Addition, InitialStateInvariants) {
    auto g = table(101);
    auto s = init_addition_state(g, 0, 20, 60, 2, 1);
    EXPECT_EQ(addition_state_problem(g, s), "");
    EXPECT_EQ(s.m_id.size(), 20u);
    EXPECT_EQ(s.m_rb.size(), 60u);
    auto s4 = init_addition_state(g, 0, 20, 60, 4, 1);
    EXPECT_EQ(addition_state_problem(g, s4), "");
    EXPECT_THROW(init_addition_state(g, 0, 20, 62, 4, 1), PreconditionError);
    auto j = to_json(s);
    auto back = addition_state_from_json(j);
    EXPECT_EQ(back.m_id, s.m_id);
    EXPECT_EQ(back.m_rb, s.m_rb);
    EXPECT_EQ(back.rem_a, s.rem_a);
    EXPECT_EQ(back.rem_b, s.rem_b);
}

TEST(Addition, FiveStepsOnZ101) {
    auto g = table(101);
    auto s = init_addition_state(g, 0, 20, 60, 2, 3);
    std::mt19937_64 rng(11);
    std::vector<int> colours0;
    for (const Edge& e : s.m_rb) colours0.push_back(e.colour);
    std::sort(colours0.begin(), colours0.end());
    for (int step = 0; step < 5; ++step) {
        SCOPED_TRACE(step);
        auto [x, y] = fresh_pair(g, s, rng);
        auto before = state_vertices(g, s);
        AdditionOptions o;
        o.seed = step;
        auto r = addition_step(g, s, x, y, o);
        EXPECT_EQ(r.e1.size(), 4u);
        EXPECT_EQ(r.f1.size(), 6u);
        EXPECT_EQ(r.e2.size(), r.f2.size());
        EXPECT_EQ(r.e3.size(), r.f3.size() + 1);
        EXPECT_EQ(r.next.m_id.size(), s.m_id.size() + 1);
        EXPECT_EQ(addition_state_problem(g, r.next), "");
        auto after = state_vertices(g, r.next);
        before.insert(x);
        before.insert(flat_b(g, y));
        EXPECT_EQ(after, before);
        std::vector<int> cols;
        for (const Edge& e : r.next.m_rb) cols.push_back(e.colour);
        std::sort(cols.begin(), cols.end());
        EXPECT_EQ(cols, colours0);
        s = r.next;
    }
    EXPECT_EQ(s.m_id.size(), 25u);
}

TEST(Addition, TooFewIdentityEdges) {
    auto g = table(101);
    auto s = init_addition_state(g, 0, 3, 20, 2, 1);
    std::mt19937_64 rng(1);
    auto [x, y] = fresh_pair(g, s, rng);
    try {
        addition_step(g, s, x, y);
        FAIL() << "expected exhaustion";
    } catch (const SearchExhausted& ex) {
        EXPECT_EQ(ex.stage(), "stage i");
    }
}

TEST(Addition, Preconditions) {
    auto g = table(31);
    auto s = init_addition_state(g, 0, 6, 8, 2, 1);
    EXPECT_THROW(addition_step(g, s, s.m_id[0].a, 0), PreconditionError);
    auto bad = s;
    bad.m_rb.push_back(bad.m_id[0]);
    EXPECT_THROW(addition_step(g, bad, 0, 0), PreconditionError);
}
