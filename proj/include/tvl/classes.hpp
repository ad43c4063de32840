#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tvl/core.hpp"
#include "tvl/expander.hpp"
#include "tvl/switchers.hpp"

namespace tvl {

// Unset thresholds fall back to the 50/75/95% quantiles of the nonzero
// weights. band_count = 0 picks the smallest count with ratio <= 2.
struct ClassifierConfig {
    std::optional<double> w0, w1, w2;
    int band_count = 0;
    int multiplicity_cap = 0;  // 0 = ceil(log2(colours)^2)
    double alpha = 0.0;        // extract_expander override, 0 = default
    std::uint64_t seed = 0;
};

struct ColourClass {
    enum Kind { Heavy, Band };
    Kind kind = Heavy;
    std::vector<int> colours;  // sorted
    int band = -1;
    // Band classes: auxiliary graph stats before extraction and of the expander.
    double d_input = 0, d_expander = 0;
    int min_degree = 0;
    std::size_t steps = 0;
    SearchMode stop_mode = SearchMode::Exact;
};

struct ColourClassFamily {
    double w0 = 0, w1 = 0, w2 = 0;
    std::vector<double> band_edges;  // band i covers (band_edges[i], band_edges[i+1]]
    std::vector<ColourClass> classes;
    double total_weight = 0;
    double uncovered_weight = 0;
    std::vector<int> multiplicity;  // per colour id, classes of size > 2
    int multiplicity_cap = 0;
    std::vector<int> over_cap;  // colours above the cap
    std::size_t heavy_pairs = 0, moderate_pairs = 0, light_pairs = 0, very_light_pairs = 0;
};

ColourClassFamily classify_colours(const SwitcherWeights& weights, const ClassifierConfig& cfg,
                                   const ColouredBipartiteGraph& graph);

struct ExchangeParams {
    double epsilon = 0.0;
    double eta = 0.0;
    int L = 0;
    int ell = 4;
};

struct ExchangeTrial {
    std::vector<int> forbidden_vertices;  // flat ids
    std::vector<int> forbidden_colours;
    bool passed = false;
    std::optional<ColourSwitcher> witness;
    std::string certificate;  // why it failed
};

struct ExchangeReport {
    int c = 0, d = 0;
    ExchangeParams params;
    std::size_t forbidden_size = 0;  // floor(eps |G|) + L
    std::vector<ExchangeTrial> trials;
    int passes = 0;
    bool all_passed() const { return passes == static_cast<int>(trials.size()); }
};

// Forbidden sets for trial t are prefixes of a permutation seeded by
// (seed, c, d, t), so smaller (eps, L) forbid subsets of larger ones.
ExchangeReport test_pair_exchangeable(const SwitcherIndex& idx, int c, int d, const ExchangeParams& params, int trials,
                                      std::uint64_t seed);
ExchangeReport test_pair_exchangeable(const ColouredBipartiteGraph& graph, int c, int d, const ExchangeParams& params,
                                      int trials, std::uint64_t seed);

struct ClassExchangeReport {
    std::vector<int> colours;
    std::vector<std::pair<int, int>> failing_pairs;
    std::vector<int> exceptional;  // B: a greedy vertex cover of failing_pairs
    bool passed = false;           // |B| <= eta |C|
};

ClassExchangeReport test_class_exchangeable(const SwitcherIndex& idx, const std::vector<int>& colours,
                                            const ExchangeParams& params, int trials, std::uint64_t seed,
                                            int threads = 1);

}  // namespace tvl
