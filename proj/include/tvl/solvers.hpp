#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tvl/core.hpp"

namespace tvl {

struct ExactResult {
    int size = 0;
    RainbowMatching witness;
    bool optimal = false;
    std::uint64_t nodes = 0;
};

struct ExactOptions {
    std::uint64_t budget = 0;  // node limit, 0 = unlimited
    int threads = 1;
};

ExactResult max_rainbow_matching_exact(const ColouredBipartiteGraph& graph, const ExactOptions& opts = {});

inline constexpr int kCountTransversalCap = 12;
std::uint64_t count_full_transversals(const LatinArray& square);

RainbowMatching greedy_nibble_matching(const ColouredBipartiteGraph& graph, double bite_fraction, std::uint64_t seed);

RainbowMatching local_switch_augment(const ColouredBipartiteGraph& graph, const RainbowMatching& m, int rounds,
                                     std::uint64_t seed);

struct RareColourResult {
    RainbowMatching matching;
    int target = 0;       // ceil(1.8 d)
    bool reached = false; // false would contradict the 1.8d argument
    int exchanges = 0;    // number of one-out-two-in exchanges applied
    std::string note;
};

// Maximal matching plus the one-out-two-in exchange until |M| >= 1.8d.
RareColourResult rare_colour_matching(const ColouredBipartiteGraph& graph, int d);

// Maximum matching ignoring colours (Hopcroft-Karp).
int max_bipartite_matching(const ColouredBipartiteGraph& graph);

}  // namespace tvl
