#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tvl/core.hpp"

namespace tvl {

using Triple = std::array<int, 3>;

struct TripleSystem {
    int n = 0;
    std::vector<Triple> triples;  // each sorted ascending
};

// Empty when s is a Steiner triple system, else the first problem.
std::string sts_problem(const TripleSystem& s);
TripleSystem bose_sts(int m);

struct Reduction {
    ColouredBipartiteGraph graph;
    std::vector<int> part_a, part_b, part_c;  // point labels; dense index = position
    int deleted_point = -1;                   // set when n = 1 mod 6
    int attempts = 1;
    bool balanced = false;
};

// Uniform random tripartition of the points; with `balanced`, resamples until
// |A| = |B| = |C| (up to max_attempts, then throws SearchExhausted).
Reduction tripartition_reduce(const TripleSystem& s, std::uint64_t seed, bool balanced, int max_attempts = 100000);

std::vector<Triple> matching_from_rainbow(const TripleSystem& s, const RainbowMatching& m, const Reduction& red);

struct BrouwerOptions {
    int exact_cap = 12;            // exact solver when part size <= cap
    std::uint64_t exact_budget = 0;
    int heuristic_rounds = 2000;
    int threads = 1;
};

struct BrouwerReport {
    std::vector<Triple> best;
    std::uint64_t best_seed = 0;
    int target = 0;  // ceil((n-4)/3)
    bool achieved = false;
    int seeds_run = 0;
    std::vector<int> size_per_seed;
    std::vector<bool> exact_per_seed;
};

BrouwerReport brouwer_pipeline(const TripleSystem& s, int seeds, const BrouwerOptions& opts = {});

// Exact maximum number of pairwise disjoint triples (small systems only).
int max_sts_matching(const TripleSystem& s);

}  // namespace tvl
