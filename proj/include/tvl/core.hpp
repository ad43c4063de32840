#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <initializer_list>
#include <vector>

#include "tvl/errors.hpp"

namespace tvl {

inline constexpr int kEmpty = -1;

// n x n grid; kEmpty marks an unfilled cell.
class LatinArray {
public:
    LatinArray() = default;
    // Throws PreconditionError if a symbol repeats in a row or column.
    explicit LatinArray(std::vector<std::vector<int>> rows);
    LatinArray(std::initializer_list<std::vector<int>> rows) : LatinArray(std::vector<std::vector<int>>(rows)) {}

    int order() const { return n_; }
    int at(int r, int c) const { return cells_[static_cast<std::size_t>(r) * n_ + c]; }
    bool filled(int r, int c) const { return at(r, c) != kEmpty; }
    int symbol_count() const { return symbol_count_; }
    bool is_latin_square() const;
    std::vector<std::vector<int>> rows() const;

    bool operator==(const LatinArray& o) const { return n_ == o.n_ && cells_ == o.cells_; }

private:
    int n_ = 0;
    int symbol_count_ = 0;
    std::vector<int> cells_;
};

struct Edge {
    int a = 0;
    int b = 0;
    int colour = 0;
    auto operator<=>(const Edge&) const = default;
};

// Bipartite graph with classes A = [0, a_size), B = [0, b_size).
// Construction enforces simplicity and a proper colouring; use validate()
// on raw edge lists to inspect violations without throwing.
class ColouredBipartiteGraph {
public:
    ColouredBipartiteGraph() = default;
    ColouredBipartiteGraph(int a_size, int b_size, std::vector<Edge> edges);

    int a_size() const { return a_; }
    int b_size() const { return b_; }
    int vertex_count() const { return a_ + b_; }
    const std::vector<Edge>& edges() const { return edges_; }
    std::size_t edge_count() const { return edges_.size(); }
    // Colour ids live in [0, colour_bound()); colour_count() of them are used.
    int colour_bound() const { return colour_bound_; }
    int colour_count() const { return colour_count_; }
    const std::vector<int>& colours() const { return used_colours_; }

    // kEmpty when a and b are not adjacent.
    int colour_of(int a, int b) const { return mat_[static_cast<std::size_t>(a) * b_ + b]; }
    bool has_edge(int a, int b) const { return colour_of(a, b) != kEmpty; }
    bool contains(const Edge& e) const {
        return e.a >= 0 && e.a < a_ && e.b >= 0 && e.b < b_ && colour_of(e.a, e.b) == e.colour;
    }
    // Neighbour of a (resp. b) along the edge of colour c, or kEmpty.
    int b_via(int a, int c) const;
    int a_via(int b, int c) const;
    const std::vector<int>& a_neighbours(int a) const { return a_adj_[a]; }
    const std::vector<int>& b_neighbours(int b) const { return b_adj_[b]; }
    int degree_a(int a) const { return static_cast<int>(a_adj_[a].size()); }
    int degree_b(int b) const { return static_cast<int>(b_adj_[b].size()); }
    int min_degree() const;
    // Edges of colour c (empty for unused ids).
    const std::vector<Edge>& colour_class(int c) const;

private:
    int a_ = 0;
    int b_ = 0;
    int colour_bound_ = 0;
    int colour_count_ = 0;
    std::vector<Edge> edges_;
    std::vector<int> mat_;
    std::vector<std::vector<int>> a_adj_, b_adj_;
    std::vector<std::vector<Edge>> by_colour_;
    std::vector<int> used_colours_;
    // sorted (colour, neighbour) pairs per vertex
    std::vector<std::vector<std::pair<int, int>>> a_col_, b_col_;
};

struct RainbowMatching {
    std::vector<Edge> edges;
    std::size_t size() const { return edges.size(); }
    bool operator==(const RainbowMatching&) const = default;
};

struct Transversal {
    std::vector<std::pair<int, int>> cells;
    std::size_t size() const { return cells.size(); }
};

struct ValidationReport {
    bool proper = true;
    bool simple = true;
    bool in_range = true;
    std::vector<std::pair<Edge, Edge>> colour_clashes;
    std::vector<std::pair<Edge, Edge>> parallel_edges;
    std::map<int, int> colour_counts;
    std::vector<int> degrees_a, degrees_b;
    bool ok() const { return proper && simple && in_range; }
};

ColouredBipartiteGraph latin_to_graph(const LatinArray& square);
LatinArray graph_to_latin(const ColouredBipartiteGraph& graph);
Transversal matching_to_transversal(const RainbowMatching& m, const LatinArray& square);
ValidationReport validate(int a_size, int b_size, const std::vector<Edge>& edges);
ValidationReport validate(const ColouredBipartiteGraph& graph);

// Empty string when m is a rainbow matching of g, else the first problem found.
std::string rainbow_matching_problem(const ColouredBipartiteGraph& g, const std::vector<Edge>& m);
inline bool is_rainbow_matching(const ColouredBipartiteGraph& g, const std::vector<Edge>& m) {
    return rainbow_matching_problem(g, m).empty();
}
void check_rainbow_matching(const ColouredBipartiteGraph& g, const std::vector<Edge>& m);

// Relabels symbols in first-appearance (row-major) order. Returns the map
// old id -> new id alongside the relabelled array.
std::pair<LatinArray, std::map<int, int>> relabel_first_appearance(const LatinArray& square);

// Vertex ids in flattened form: A-vertex a -> a, B-vertex b -> a_size + b.
inline int flat_a(const ColouredBipartiteGraph&, int a) { return a; }
inline int flat_b(const ColouredBipartiteGraph& g, int b) { return g.a_size() + b; }

}  // namespace tvl
