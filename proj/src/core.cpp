#include "tvl/core.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace tvl {

LatinArray::LatinArray(std::vector<std::vector<int>> rows) {
    n_ = static_cast<int>(rows.size());
    cells_.assign(static_cast<std::size_t>(n_) * n_, kEmpty);
    std::set<int> symbols;
    for (int r = 0; r < n_; ++r) {
        require(static_cast<int>(rows[r].size()) == n_, "LatinArray: row " + std::to_string(r) + " has wrong length");
        for (int c = 0; c < n_; ++c) {
            int s = rows[r][c];
            require(s >= kEmpty, "LatinArray: negative symbol");
            cells_[static_cast<std::size_t>(r) * n_ + c] = s;
            if (s != kEmpty) symbols.insert(s);
        }
    }
    for (int r = 0; r < n_; ++r) {
        std::set<int> row_seen, col_seen;
        for (int c = 0; c < n_; ++c) {
            int s = at(r, c);
            if (s != kEmpty && !row_seen.insert(s).second)
                throw PreconditionError("LatinArray: symbol " + std::to_string(s) + " repeats in row " + std::to_string(r));
            int t = at(c, r);
            if (t != kEmpty && !col_seen.insert(t).second)
                throw PreconditionError("LatinArray: symbol " + std::to_string(t) + " repeats in column " + std::to_string(r));
        }
    }
    symbol_count_ = static_cast<int>(symbols.size());
}

bool LatinArray::is_latin_square() const {
    if (symbol_count_ != n_) return false;
    return std::find(cells_.begin(), cells_.end(), kEmpty) == cells_.end();
}

std::vector<std::vector<int>> LatinArray::rows() const {
    std::vector<std::vector<int>> out(n_, std::vector<int>(n_));
    for (int r = 0; r < n_; ++r)
        for (int c = 0; c < n_; ++c) out[r][c] = at(r, c);
    return out;
}

ColouredBipartiteGraph::ColouredBipartiteGraph(int a_size, int b_size, std::vector<Edge> edges)
    : a_(a_size), b_(b_size), edges_(std::move(edges)) {
    require(a_ >= 0 && b_ >= 0, "graph: negative class size");
    ValidationReport rep = validate(a_, b_, edges_);
    if (!rep.in_range) throw PreconditionError("graph: edge endpoint or colour out of range");
    if (!rep.simple) throw PreconditionError("graph: parallel edges");
    if (!rep.proper) {
        const auto& [e, f] = rep.colour_clashes.front();
        std::ostringstream os;
        os << "graph: improper colouring, edges (" << e.a << "," << e.b << "," << e.colour << ") and (" << f.a << ","
           << f.b << "," << f.colour << ")";
        throw PreconditionError(os.str());
    }
    std::sort(edges_.begin(), edges_.end(), [](const Edge& x, const Edge& y) {
        return std::tie(x.a, x.b) < std::tie(y.a, y.b);
    });
    mat_.assign(static_cast<std::size_t>(a_) * b_, kEmpty);
    a_adj_.assign(a_, {});
    b_adj_.assign(b_, {});
    a_col_.assign(a_, {});
    b_col_.assign(b_, {});
    for (const Edge& e : edges_) colour_bound_ = std::max(colour_bound_, e.colour + 1);
    by_colour_.assign(colour_bound_, {});
    for (const Edge& e : edges_) {
        mat_[static_cast<std::size_t>(e.a) * b_ + e.b] = e.colour;
        a_adj_[e.a].push_back(e.b);
        b_adj_[e.b].push_back(e.a);
        a_col_[e.a].push_back({e.colour, e.b});
        b_col_[e.b].push_back({e.colour, e.a});
        by_colour_[e.colour].push_back(e);
    }
    for (auto& v : b_adj_) std::sort(v.begin(), v.end());
    for (auto& v : a_col_) std::sort(v.begin(), v.end());
    for (auto& v : b_col_) std::sort(v.begin(), v.end());
    for (int c = 0; c < colour_bound_; ++c)
        if (!by_colour_[c].empty()) used_colours_.push_back(c);
    colour_count_ = static_cast<int>(used_colours_.size());
}

static int lookup(const std::vector<std::pair<int, int>>& v, int c) {
    auto it = std::lower_bound(v.begin(), v.end(), std::make_pair(c, -1));
    return (it != v.end() && it->first == c) ? it->second : kEmpty;
}

int ColouredBipartiteGraph::b_via(int a, int c) const { return lookup(a_col_[a], c); }
int ColouredBipartiteGraph::a_via(int b, int c) const { return lookup(b_col_[b], c); }

int ColouredBipartiteGraph::min_degree() const {
    int d = vertex_count() == 0 ? 0 : 1 << 30;
    for (int a = 0; a < a_; ++a) d = std::min(d, degree_a(a));
    for (int b = 0; b < b_; ++b) d = std::min(d, degree_b(b));
    return d;
}

const std::vector<Edge>& ColouredBipartiteGraph::colour_class(int c) const {
    static const std::vector<Edge> none;
    if (c < 0 || c >= colour_bound_) return none;
    return by_colour_[c];
}

ValidationReport validate(int a_size, int b_size, const std::vector<Edge>& edges) {
    ValidationReport rep;
    rep.degrees_a.assign(std::max(a_size, 0), 0);
    rep.degrees_b.assign(std::max(b_size, 0), 0);
    std::map<std::pair<int, int>, Edge> at_a, at_b;  // (vertex, colour) -> edge
    std::map<std::pair<int, int>, Edge> seen;        // (a, b) -> edge
    for (const Edge& e : edges) {
        if (e.a < 0 || e.a >= a_size || e.b < 0 || e.b >= b_size || e.colour < 0) {
            rep.in_range = false;
            continue;
        }
        rep.degrees_a[e.a]++;
        rep.degrees_b[e.b]++;
        rep.colour_counts[e.colour]++;
        if (auto [it, fresh] = seen.insert({{e.a, e.b}, e}); !fresh) {
            rep.simple = false;
            rep.parallel_edges.push_back({it->second, e});
        }
        if (auto [it, fresh] = at_a.insert({{e.a, e.colour}, e}); !fresh) {
            rep.proper = false;
            rep.colour_clashes.push_back({it->second, e});
        }
        if (auto [it, fresh] = at_b.insert({{e.b, e.colour}, e}); !fresh) {
            rep.proper = false;
            rep.colour_clashes.push_back({it->second, e});
        }
    }
    return rep;
}

ValidationReport validate(const ColouredBipartiteGraph& graph) {
    return validate(graph.a_size(), graph.b_size(), graph.edges());
}

ColouredBipartiteGraph latin_to_graph(const LatinArray& square) {
    const int n = square.order();
    std::vector<Edge> edges;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            if (square.filled(r, c)) edges.push_back({r, c, square.at(r, c)});
    return ColouredBipartiteGraph(n, n, std::move(edges));
}

LatinArray graph_to_latin(const ColouredBipartiteGraph& graph) {
    require(graph.a_size() == graph.b_size(), "graph_to_latin: classes differ in size");
    const int n = graph.a_size();
    require(graph.edge_count() == static_cast<std::size_t>(n) * n, "graph_to_latin: graph is not complete bipartite");
    std::vector<std::vector<int>> rows(n, std::vector<int>(n, kEmpty));
    for (const Edge& e : graph.edges()) rows[e.a][e.b] = e.colour;
    return LatinArray(std::move(rows));
}

std::string rainbow_matching_problem(const ColouredBipartiteGraph& g, const std::vector<Edge>& m) {
    std::set<int> as, bs, cs;
    for (const Edge& e : m) {
        if (!g.contains(e)) {
            std::ostringstream os;
            os << "edge (" << e.a << "," << e.b << "," << e.colour << ") not in host";
            return os.str();
        }
        if (!as.insert(e.a).second || !bs.insert(e.b).second) return "edges share a vertex";
        if (!cs.insert(e.colour).second) return "colour " + std::to_string(e.colour) + " repeats";
    }
    return {};
}

void check_rainbow_matching(const ColouredBipartiteGraph& g, const std::vector<Edge>& m) {
    std::string why = rainbow_matching_problem(g, m);
    if (!why.empty()) throw PreconditionError("not a rainbow matching: " + why);
}

Transversal matching_to_transversal(const RainbowMatching& m, const LatinArray& square) {
    for (const Edge& e : m.edges) {
        require(e.a >= 0 && e.a < square.order() && e.b >= 0 && e.b < square.order() && square.at(e.a, e.b) == e.colour,
                "matching_to_transversal: edge does not belong to the square's graph");
    }
    check_rainbow_matching(latin_to_graph(square), m.edges);
    Transversal t;
    for (const Edge& e : m.edges) t.cells.push_back({e.a, e.b});
    return t;
}

std::pair<LatinArray, std::map<int, int>> relabel_first_appearance(const LatinArray& square) {
    std::map<int, int> map;
    auto rows = square.rows();
    for (auto& row : rows)
        for (int& s : row) {
            if (s == kEmpty) continue;
            auto [it, fresh] = map.insert({s, static_cast<int>(map.size())});
            s = it->second;
        }
    return {LatinArray(std::move(rows)), map};
}

}  // namespace tvl
