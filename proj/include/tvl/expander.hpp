#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace tvl {

// Undirected simple graph. labels[i] is the id of vertex i in whatever graph
// this one was cut out of (identity for fresh graphs).
class SimpleGraph {
public:
    SimpleGraph() = default;
    SimpleGraph(int n, const std::vector<std::pair<int, int>>& edges);

    int vertex_count() const { return static_cast<int>(adj_.size()); }
    std::size_t edge_count() const { return edges_; }
    const std::vector<int>& neighbours(int v) const { return adj_[v]; }
    bool adjacent(int u, int v) const;
    int degree(int v) const { return static_cast<int>(adj_[v].size()); }
    double average_degree() const;  // d(G); 0 for the empty graph
    int min_degree() const;
    int max_degree() const;
    std::vector<std::pair<int, int>> edge_list() const;  // u < v, sorted
    const std::vector<int>& labels() const { return labels_; }

    // Induced subgraph on the given vertices (kept in the given order).
    SimpleGraph induced(const std::vector<int>& keep) const;
    SimpleGraph without(const std::vector<int>& drop) const;

    static SimpleGraph complete(int n);
    static SimpleGraph cycle(int n);
    static SimpleGraph path(int n);
    static SimpleGraph hypercube(int dim);
    static SimpleGraph erdos_renyi(int n, double p, std::uint64_t seed);
    // Two K_k joined by one edge between vertex k-1 and vertex k.
    static SimpleGraph barbell(int k);

private:
    std::vector<std::vector<int>> adj_;
    std::vector<int> labels_;
    std::size_t edges_ = 0;
};

struct ExpanderParams {
    double alpha = 1.0;
    double delta_cap = 0.0;  // K may have max degree <= floor(delta_cap)
};

// 1 / (16 ln n), clamped to 1 for n <= 2.
double default_alpha(int n);

enum class SearchMode { Exact, Heuristic };
std::string to_string(SearchMode m);

inline constexpr int kExactExpansionCap = 14;

struct VerificationReport {
    bool passed = true;
    SearchMode mode = SearchMode::Exact;
    // Set on failure: U, the vertices the adversary removed from N(U), and
    // the surviving neighbourhood.
    std::vector<int> witness_u;
    std::vector<int> killed;
    std::vector<int> neighbourhood;
    std::uint64_t subsets_checked = 0;
};

// Largest number of vertices of N(U) the adversary can cut off with a K of
// max degree floor(delta_cap); exact branch and bound. Returns the surviving
// neighbourhood and fills `killed`.
std::vector<int> adversarial_neighbourhood(const SimpleGraph& g, const std::vector<int>& u, double delta_cap,
                                           std::vector<int>* killed = nullptr, bool exact = true);

VerificationReport verify_expansion(const SimpleGraph& h, const ExpanderParams& params, SearchMode mode,
                                    std::uint64_t seed = 0, int samples = 2000);

struct ProcessStep {
    enum Kind { MinDegreeDeletion, SparseSplit, DenseSplit, Stop };
    Kind kind = Stop;
    int n_before = 0, n_after = 0;
    double d_before = 0, d_after = 0;
    int min_degree_before = 0;
    int u_size = 0, n_size = 0;  // splits only
    SearchMode mode = SearchMode::Exact;
};
std::string to_string(ProcessStep::Kind k);

struct ExtractResult {
    SimpleGraph h;  // labels refer to the input graph
    ExpanderParams params;
    std::vector<ProcessStep> trace;
    SearchMode stop_mode = SearchMode::Exact;
};

// alpha_override <= 0 means default_alpha(|g|).
ExtractResult extract_expander(const SimpleGraph& g, double alpha_override = 0.0, std::uint64_t seed = 0);

struct PathsResult {
    std::vector<std::vector<int>> paths;
    bool exhausted = false;  // fewer than r found
};

PathsResult disjoint_short_paths(const SimpleGraph& h, int x, int y, int r, int max_len,
                                 const std::set<int>& forbidden_vertices = {},
                                 const std::set<std::pair<int, int>>& forbidden_edges = {});

struct C4Report {
    std::uint64_t labelled = 0;   // ordered (w,x,y,z), all distinct
    std::uint64_t closed_walks = 0;  // 4-tuples with wx,xy,yz,zw edges
    double lower_bound = 0;       // 16 e^4 / n^4 - 6 n^3
};
C4Report count_labelled_c4(const SimpleGraph& g);

}  // namespace tvl
