#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tvl/core.hpp"

namespace tvl {

// c,d-switcher: m1 uses c, m2 uses d, otherwise the same colours on the same
// vertices. Order = number of edges in each matching.
struct ColourSwitcher {
    RainbowMatching m1, m2;
    int switch_from = 0;
    int switch_to = 0;
    int order() const { return static_cast<int>(m1.size()); }
    auto operator<=>(const ColourSwitcher& o) const {
        if (auto x = m1.edges <=> o.m1.edges; x != 0) return x;
        if (auto x = m2.edges <=> o.m2.edges; x != 0) return x;
        if (auto x = switch_from <=> o.switch_from; x != 0) return x;
        return switch_to <=> o.switch_to;
    }
    bool operator==(const ColourSwitcher& o) const = default;
};

ColourSwitcher reversed(const ColourSwitcher& s);
// Colours present in both matchings.
std::vector<int> shared_colours(const ColourSwitcher& s);
// Sorted flat vertex ids (A as a, B as a_size + b).
std::vector<int> switcher_vertices(const ColouredBipartiteGraph& g, const ColourSwitcher& s);

// Empty when s is a valid switcher in g, else the first problem.
std::string switcher_problem(const ColouredBipartiteGraph& g, const ColourSwitcher& s);

// Rainbow 4-cycle a1-b1-a2-b2 with a1 < a2, b1 < b2. Matching 0 is
// {a1b1, a2b2}, matching 1 is {a1b2, a2b1}.
struct RainbowCycle {
    int a1, a2, b1, b2;
    std::array<int, 2> m0;  // colours of a1b1, a2b2
    std::array<int, 2> m1;  // colours of a1b2, a2b1
    std::array<Edge, 2> matching(int which) const;
    std::array<int, 4> colours() const { return {m0[0], m0[1], m1[0], m1[1]}; }
    bool has_colour(int c) const { return m0[0] == c || m0[1] == c || m1[0] == c || m1[1] == c; }
    // Index of the matching holding colour c.
    int side_of(int c) const { return (m0[0] == c || m0[1] == c) ? 0 : 1; }
    int opposite(int c) const;
    bool disjoint(const RainbowCycle& o) const {
        return a1 != o.a1 && a1 != o.a2 && a2 != o.a1 && a2 != o.a2 && b1 != o.b1 && b1 != o.b2 && b2 != o.b1 &&
               b2 != o.b2;
    }
};

std::vector<RainbowCycle> rainbow_4cycles(const ColouredBipartiteGraph& g);

// Rainbow 4-cycles bucketed by colour triples, for repeated switcher queries.
class SwitcherIndex {
public:
    explicit SwitcherIndex(const ColouredBipartiteGraph& g);

    const ColouredBipartiteGraph& graph() const { return g_; }
    const std::vector<RainbowCycle>& cycles() const { return cycles_; }

    // All order-4 c,d-switchers, sorted. Empty when c == d.
    std::vector<ColourSwitcher> between(int c, int d) const;
    std::uint64_t count_between(int c, int d) const;

    // Visits every ordered order-4 switcher once. For null pairs (both cycles
    // on the same four colours) `null` is set and from == to == -1.
    using Visitor = std::function<void(const RainbowCycle& q1, int side1, const RainbowCycle& q2, int side2, int from,
                                       int to, bool null)>;
    void for_each(const Visitor& fn) const { for_each_part(fn, 0, 1); }
    // Buckets whose position is congruent to part mod parts; used to split
    // the work across threads with one visitor each.
    void for_each_part(const Visitor& fn, int part, int parts) const;

private:
    struct Entry {
        std::uint64_t key;
        int cycle;
        int excluded;
        auto operator<=>(const Entry&) const = default;
    };
    std::uint64_t triple_key(int x, int y, int z) const;
    std::pair<std::size_t, std::size_t> bucket(std::uint64_t key) const;
    void visit_bucket(std::size_t lo, std::size_t hi, const Visitor& fn) const;
    std::vector<std::size_t> starts_;  // bucket boundaries in entries_

    const ColouredBipartiteGraph& g_;
    std::vector<RainbowCycle> cycles_;
    std::vector<Entry> entries_;
    std::vector<std::vector<int>> by_colour_;
};

// Builds the switcher from q1 (using matching side1 in m1) and q2 (side2).
ColourSwitcher make_switcher(const RainbowCycle& q1, int side1, const RainbowCycle& q2, int side2, int from, int to);

std::vector<ColourSwitcher> enumerate_switchers4(const ColouredBipartiteGraph& g, int c, int d);

struct SwitcherWeights {
    int colour_bound = 0;
    std::vector<std::uint64_t> ordered;  // ordered[c * colour_bound + d] = # c,d-switchers
    std::uint64_t null_switchers = 0;    // ordered pairs of equal-colour cycles
    std::uint64_t at(int c, int d) const {
        return c < 0 || d < 0 || c >= colour_bound || d >= colour_bound
                   ? 0
                   : ordered[static_cast<std::size_t>(c) * colour_bound + d];
    }
    std::uint64_t total() const;  // sum over unordered pairs
    bool symmetric() const;
    // (c, d, w) for c < d with w > 0, sorted.
    std::vector<std::array<std::uint64_t, 3>> nonzero() const;
};

SwitcherWeights weight_matrix(const ColouredBipartiteGraph& g, int threads = 1);

struct BoundReport {
    int n = 0;  // a_size + b_size
    std::uint64_t switchers = 0;
    std::uint64_t null_switchers = 0;
    std::array<std::uint64_t, 5> max_count{};
    std::array<double, 5> bound{};
    std::array<double, 5> max_ratio{};
    std::array<std::uint64_t, 5> violations{};
    bool ok() const { return violations == std::array<std::uint64_t, 5>{}; }
};

// Exhaustive check of the five per-key switcher bounds with every key counted.
BoundReport check_count_bounds(const ColouredBipartiteGraph& g);

// Chains an a,b-switcher with a b,c-switcher into an a,c-switcher.
ColourSwitcher compose_switchers(const ColourSwitcher& s_ab, const ColourSwitcher& s_bc);

RainbowMatching apply_switcher(const RainbowMatching& m, const ColourSwitcher& s);

// Greedy search with backtracking for a c_0,c_k-switcher built from order-4
// switchers along the colour path, avoiding the given vertices (flat ids)
// and colours. Returns false if none found within `budget` nodes (0 = no cap).
bool find_chain_switcher(const SwitcherIndex& idx, const std::vector<int>& path, const std::vector<char>& banned_vertex,
                         const std::vector<char>& banned_colour, ColourSwitcher& out, std::uint64_t budget = 0);

}  // namespace tvl
