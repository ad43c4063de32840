#include "tvl/pseudorandom.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "tvl/errors.hpp"

namespace tvl {

TripartiteHypergraph build_hypergraph(const ColouredBipartiteGraph& graph, int c_size) {
    TripartiteHypergraph h;
    h.a_size = graph.a_size();
    h.b_size = graph.b_size();
    h.c_size = std::max(graph.colour_bound(), c_size);
    for (const Edge& e : graph.edges()) h.triples.push_back({e.a, e.b, e.colour});
    std::sort(h.triples.begin(), h.triples.end());
    return h;
}

TripartiteHypergraph build_hypergraph(int a_size, int b_size, const std::vector<Edge>& edges, int c_size) {
    auto rep = validate(a_size, b_size, edges);
    require(rep.ok(), "build_hypergraph: input is not a simple properly coloured bipartite graph");
    return build_hypergraph(ColouredBipartiteGraph(a_size, b_size, edges), c_size);
}

TypicalityReport check_typical(const TripartiteHypergraph& h, int n, double p, double epsilon) {
    TypicalityReport rep;
    rep.n = n;
    rep.p = p;
    rep.epsilon = epsilon;
    const double tol = 1e-9;
    auto within = [&](double x, double target) {
        return x >= (1 - epsilon) * target - tol && x <= (1 + epsilon) * target + tol;
    };
    const int sizes[3] = {h.a_size, h.b_size, h.c_size};
    // projection XY: classes x, y taken from triple slots
    const std::pair<int, int> proj[3] = {{0, 1}, {1, 2}, {0, 2}};
    const char* names[3] = {"AB", "BC", "AC"};
    for (int t = 0; t < 3; ++t) {
        auto [x, y] = proj[t];
        const int nx = sizes[x], ny = sizes[y];
        std::vector<std::vector<char>> adj(nx, std::vector<char>(ny, 0));
        for (const auto& tr : h.triples) adj[tr[x]][tr[y]] = 1;
        for (int side = 0; side < 2; ++side) {
            int sz = side == 0 ? nx : ny;
            if (!within(sz, n))
                rep.violations.push_back({names[t], "class_size", side == 0 ? x : y, -1, static_cast<double>(sz),
                                          (1 - epsilon) * n, (1 + epsilon) * n});
        }
        auto nb = [&](int side, int v) {
            std::vector<char> r(side == 0 ? ny : nx, 0);
            if (side == 0)
                for (int w = 0; w < ny; ++w) r[w] = adj[v][w];
            else
                for (int w = 0; w < nx; ++w) r[w] = adj[w][v];
            return r;
        };
        for (int side = 0; side < 2; ++side) {
            const int sz = side == 0 ? nx : ny;
            std::vector<std::vector<char>> rows(sz);
            for (int v = 0; v < sz; ++v) rows[v] = nb(side, v);
            const std::string who = std::string(1, names[t][side]);
            for (int v = 0; v < sz; ++v) {
                double deg = static_cast<double>(std::count(rows[v].begin(), rows[v].end(), 1));
                if (!within(deg, p * n))
                    rep.violations.push_back({names[t], "degree", v, side, deg, (1 - epsilon) * p * n,
                                              (1 + epsilon) * p * n});
            }
            for (int u = 0; u < sz; ++u)
                for (int v = u + 1; v < sz; ++v) {
                    int common = 0;
                    for (std::size_t w = 0; w < rows[u].size(); ++w) common += rows[u][w] && rows[v][w];
                    if (!within(common, p * p * n))
                        rep.violations.push_back({names[t], "codegree:" + who, u, v, static_cast<double>(common),
                                                  (1 - epsilon) * p * p * n, (1 + epsilon) * p * p * n});
                }
        }
    }
    return rep;
}

std::string gadget_problem(const ColouredBipartiteGraph& g, const Gadget& x, int c0, const std::vector<int>& extra) {
    std::set<int> vs(x.vertices.begin(), x.vertices.end());
    if (vs.size() != x.vertices.size()) return "repeated vertex";
    std::set<int> room = vs;
    room.insert(extra.begin(), extra.end());
    auto flat = [&](const Edge& e) { return std::pair<int, int>{e.a, g.a_size() + e.b}; };
    std::set<int> seen;
    for (const Edge& e : x.c0_edges) {
        if (!g.contains(e) || e.colour != c0) return "c0 edge missing or wrong colour";
        auto [u, v] = flat(e);
        if (!vs.count(u) || !vs.count(v)) return "c0 edge leaves the vertex set";
        if (!seen.insert(u).second || !seen.insert(v).second) return "c0 edges are not a matching";
    }
    seen.clear();
    std::set<int> cols;
    for (const Edge& e : x.rainbow) {
        if (!g.contains(e)) return "rainbow edge missing";
        auto [u, v] = flat(e);
        if (!room.count(u) || !room.count(v)) return "rainbow edge leaves the vertex set";
        if (!seen.insert(u).second || !seen.insert(v).second) return "rainbow edges are not a matching";
        if (!cols.insert(e.colour).second) return "rainbow edges repeat a colour";
    }
    if (std::vector<int>(cols.begin(), cols.end()) != x.colours) return "rainbow colours differ from the colour set";
    return "";
}

std::string family_problem(const std::vector<Gadget>& family, bool colour_disjoint, const std::vector<int>& shared) {
    std::set<int> vs, cs;
    std::set<int> skip(shared.begin(), shared.end());
    for (const auto& x : family) {
        for (int v : x.vertices)
            if (!vs.insert(v).second) return "vertex " + std::to_string(v) + " used twice";
        if (colour_disjoint)
            for (int c : x.colours)
                if (!skip.count(c) && !cs.insert(c).second) return "colour " + std::to_string(c) + " used twice";
    }
    return "";
}

std::string to_string(AuditMode m) { return m == AuditMode::Exact ? "exact" : "greedy"; }

bool PseudorandomAudit::passed() const {
    for (const auto& p : props)
        if (p.checked && !p.passed) return false;
    return true;
}

int p7_block_size(int colours) {
    int k = 0;
    while (k < 100 && (k + 1) * (k + 2) <= colours - 1) ++k;
    return k;
}

namespace {

std::uint64_t ceil_quota(double x) { return static_cast<std::uint64_t>(std::ceil(x - 1e-12)); }

struct Ctx {
    const ColouredBipartiteGraph& g;
    int A, B, bound;
    explicit Ctx(const ColouredBipartiteGraph& gr)
        : g(gr), A(gr.a_size()), B(gr.b_size()), bound(gr.colour_bound()) {}
    int fb(int b) const { return A + b; }
    // c-neighbour of flat vertex v, as a flat id
    int via(int v, int c) const {
        if (v < A) {
            int b = g.b_via(v, c);
            return b == kEmpty ? -1 : A + b;
        }
        int a = g.a_via(v - A, c);
        return a == kEmpty ? -1 : a;
    }
    Edge edge(int u, int v) const {
        if (u >= A) std::swap(u, v);
        return {u, v - A, g.colour_of(u, v - A)};
    }
    const std::vector<int> nbrs(int v) const {
        std::vector<int> r;
        if (v < A)
            for (int b : g.a_neighbours(v)) r.push_back(A + b);
        else
            r = g.b_neighbours(v - A);
        return r;
    }
};

Gadget finish(Gadget x) {
    std::sort(x.vertices.begin(), x.vertices.end());
    std::sort(x.colours.begin(), x.colours.end());
    std::sort(x.c0_edges.begin(), x.c0_edges.end());
    std::sort(x.rainbow.begin(), x.rainbow.end());
    return x;
}

// P4 chain u -c1- w1 -c0- w2 -c2- w3 -c0- w4 -c3- v with fresh vertices and colours.
std::optional<Gadget> p4_chain(const Ctx& cx, int u, int v, int c0, std::vector<char>& used_v,
                               std::vector<char>& used_c) {
    const auto& g = cx.g;
    for (int w1 : g.a_neighbours(u)) {
        if (used_v[cx.fb(w1)]) continue;
        int c1 = g.colour_of(u, w1);
        if (used_c[c1]) continue;
        int w2 = g.a_via(w1, c0);
        if (w2 == kEmpty || used_v[w2]) continue;
        for (int w3 : g.a_neighbours(w2)) {
            if (w3 == w1 || used_v[cx.fb(w3)]) continue;
            int c2 = g.colour_of(w2, w3);
            if (used_c[c2] || c2 == c1) continue;
            int w4 = g.a_via(w3, c0);
            if (w4 == kEmpty || used_v[w4] || w4 == w2) continue;
            int c3 = g.colour_of(w4, v);
            if (c3 == kEmpty || used_c[c3] || c3 == c1 || c3 == c2) continue;
            Gadget x;
            x.vertices = {w2, w4, cx.fb(w1), cx.fb(w3)};
            x.colours = {c1, c2, c3};
            x.c0_edges = {{w2, w1, c0}, {w4, w3, c0}};
            x.rainbow = {{u, w1, c1}, {w2, w3, c2}, {w4, v, c3}};
            for (int y : x.vertices) used_v[y] = 1;
            for (int c : x.colours) used_c[c] = 1;
            return finish(x);
        }
    }
    return std::nullopt;
}

// Alternating path c0, x1, c0, ..., xk, c0 on fresh vertices with distinct
// x_i drawn from `allowed`. With `all`, every allowed colour must be used
// (so k = number of allowed colours).
std::optional<Gadget> alt_path(const Ctx& cx, int start, int c0, int k, const std::vector<char>& allowed,
                               const std::vector<char>& used_v, std::uint64_t budget) {
    int s1 = cx.via(start, c0);
    if (s1 < 0 || used_v[start] || used_v[s1]) return std::nullopt;
    std::vector<int> path{start, s1};
    std::vector<char> on(used_v.size(), 0), took(cx.bound, 0);
    on[start] = on[s1] = 1;
    std::vector<int> cols;
    std::uint64_t nodes = 0;
    std::function<bool()> dfs = [&]() -> bool {
        if (static_cast<int>(cols.size()) == k) return true;
        if (budget && ++nodes > budget) return false;
        int end = path.back();
        for (int w : cx.nbrs(end)) {
            if (used_v[w] || on[w]) continue;
            int x = cx.edge(end, w).colour;
            if (x == c0 || !allowed[x] || took[x]) continue;
            int w2 = cx.via(w, c0);
            if (w2 < 0 || used_v[w2] || on[w2]) continue;
            path.push_back(w);
            path.push_back(w2);
            on[w] = on[w2] = 1;
            took[x] = 1;
            cols.push_back(x);
            if (dfs()) return true;
            cols.pop_back();
            took[x] = 0;
            on[w] = on[w2] = 0;
            path.pop_back();
            path.pop_back();
        }
        return false;
    };
    if (!dfs()) return std::nullopt;
    Gadget x;
    x.vertices = path;
    x.colours = cols;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        Edge e = cx.edge(path[i], path[i + 1]);
        (i % 2 == 0 ? x.c0_edges : x.rainbow).push_back(e);
    }
    return finish(x);
}

std::vector<Gadget> pack_paths(const Ctx& cx, int c0, int k, const std::vector<char>& allowed, std::uint64_t budget,
                               std::size_t stop_at = 0) {
    std::vector<char> used(cx.A + cx.B, 0);
    std::vector<Gadget> out;
    for (int s = 0; s < cx.A + cx.B; ++s) {
        if (used[s]) continue;
        if (auto x = alt_path(cx, s, c0, k, allowed, used, budget)) {
            for (int v : x->vertices) used[v] = 1;
            out.push_back(*x);
            if (stop_at && out.size() >= stop_at) break;
        }
    }
    return out;
}

// Closed alternating cycle c0, x1, ..., c0, xm through fresh vertices/colours.
std::optional<Gadget> alt_cycle(const Ctx& cx, int start, int c0, int m, const std::vector<char>& used_v,
                                const std::vector<char>& used_c, std::uint64_t budget) {
    int s1 = cx.via(start, c0);
    if (s1 < 0 || used_v[start] || used_v[s1]) return std::nullopt;
    std::vector<int> path{start, s1};
    std::vector<char> on(used_v.size(), 0), took(cx.bound, 0);
    on[start] = on[s1] = 1;
    std::vector<int> cols;
    std::uint64_t nodes = 0;
    std::function<bool()> dfs = [&]() -> bool {
        if (budget && ++nodes > budget) return false;
        int end = path.back();
        if (static_cast<int>(cols.size()) == m - 1) {
            Edge e = cx.edge(end, start);
            if (e.colour == kEmpty || e.colour == c0 || used_c[e.colour] || took[e.colour]) return false;
            cols.push_back(e.colour);
            return true;
        }
        for (int w : cx.nbrs(end)) {
            if (used_v[w] || on[w]) continue;
            int x = cx.edge(end, w).colour;
            if (x == c0 || used_c[x] || took[x]) continue;
            int w2 = cx.via(w, c0);
            if (w2 < 0 || used_v[w2] || on[w2]) continue;
            path.push_back(w);
            path.push_back(w2);
            on[w] = on[w2] = 1;
            took[x] = 1;
            cols.push_back(x);
            if (dfs()) return true;
            cols.pop_back();
            took[x] = 0;
            on[w] = on[w2] = 0;
            path.pop_back();
            path.pop_back();
        }
        return false;
    };
    if (m < 2 || !dfs()) return std::nullopt;
    Gadget x;
    x.vertices = path;
    x.colours = cols;
    for (std::size_t i = 0; i < path.size(); ++i) {
        Edge e = cx.edge(path[i], path[(i + 1) % path.size()]);
        (i % 2 == 0 ? x.c0_edges : x.rainbow).push_back(e);
    }
    return finish(x);
}

// K+1 colour-c0 edges plus a rainbow matching using exactly the colours in
// `want`, on 2K+2 fresh vertices: one alternating path (possibly a lone c0
// edge) and alternating cycles for the colours the path leaves out.
class ExactCover {
public:
    ExactCover(const Ctx& cx, int c0, std::vector<int> want, const std::vector<char>& used_v, std::uint64_t budget)
        : cx_(cx), c0_(c0), used_(used_v), budget_(budget), left_(cx.bound, 0) {
        for (int c : want) left_[c] = 1;
        remaining_ = static_cast<int>(want.size());
    }

    std::optional<Gadget> run() {
        for (int s = 0; s < cx_.A + cx_.B; ++s) {
            int s1 = cx_.via(s, c0_);
            if (s1 < 0 || used_[s] || used_[s1]) continue;
            take(s);
            take(s1);
            c0_edges_.push_back(cx_.edge(s, s1));
            if (grow_path(s1)) return result();
            c0_edges_.pop_back();
            drop(s1);
            drop(s);
            if (out_of_budget()) break;
        }
        return std::nullopt;
    }

private:
    bool out_of_budget() const { return budget_ && nodes_ > budget_; }
    void take(int v) { used_[v] = 1, verts_.push_back(v); }
    void drop(int v) { used_[v] = 0, verts_.pop_back(); }

    // Adds colour edge end-w and c0 edge w-w2; returns w2 or -1.
    int step(int end, int w) {
        int x = cx_.edge(end, w).colour;
        if (used_[w] || x == c0_ || !left_[x]) return -1;
        int w2 = cx_.via(w, c0_);
        if (w2 < 0 || w2 == w || used_[w2]) return -1;
        left_[x] = 0;
        --remaining_;
        take(w);
        take(w2);
        rainbow_.push_back(cx_.edge(end, w));
        c0_edges_.push_back(cx_.edge(w, w2));
        return w2;
    }
    void unstep() {
        int x = rainbow_.back().colour;
        rainbow_.pop_back();
        c0_edges_.pop_back();
        drop(verts_.back());
        drop(verts_.back());
        left_[x] = 1;
        ++remaining_;
    }

    bool grow_path(int end) {
        if (out_of_budget()) return false;
        ++nodes_;
        if (cycles()) return true;
        for (int w : cx_.nbrs(end)) {
            if (step(end, w) < 0) continue;
            if (grow_path(verts_.back())) return true;
            unstep();
        }
        return false;
    }

    // Covers every colour still in left_ with alternating cycles.
    bool cycles() {
        if (remaining_ == 0) return true;
        if (out_of_budget()) return false;
        int x = 0;
        while (!left_[x]) ++x;
        for (const Edge& e : cx_.g.colour_class(x)) {
            int a = e.a, b = cx_.fb(e.b);
            int b2 = cx_.via(a, c0_), a2 = cx_.via(b, c0_);
            if (used_[a] || used_[b] || b2 < 0 || a2 < 0 || used_[b2] || used_[a2]) continue;
            take(b2);
            take(a);
            take(b);
            take(a2);
            c0_edges_.push_back(cx_.edge(a, b2));
            c0_edges_.push_back(cx_.edge(b, a2));
            rainbow_.push_back(e);
            left_[x] = 0;
            --remaining_;
            if (close(a2, b2)) return true;
            ++remaining_;
            left_[x] = 1;
            rainbow_.pop_back();
            c0_edges_.pop_back();
            c0_edges_.pop_back();
            for (int i = 0; i < 4; ++i) drop(verts_.back());
        }
        return false;
    }

    bool close(int end, int head) {
        if (out_of_budget()) return false;
        ++nodes_;
        int z = cx_.edge(end, head).colour;
        if (z != kEmpty && z != c0_ && left_[z]) {
            left_[z] = 0;
            --remaining_;
            rainbow_.push_back(cx_.edge(end, head));
            if (cycles()) return true;
            rainbow_.pop_back();
            ++remaining_;
            left_[z] = 1;
        }
        for (int w : cx_.nbrs(end)) {
            if (w == head || step(end, w) < 0) continue;
            if (close(verts_.back(), head)) return true;
            unstep();
        }
        return false;
    }

    Gadget result() const {
        Gadget x;
        x.vertices = verts_;
        x.c0_edges = c0_edges_;
        x.rainbow = rainbow_;
        for (const Edge& e : rainbow_) x.colours.push_back(e.colour);
        return finish(x);
    }

    const Ctx& cx_;
    int c0_;
    std::vector<char> used_;
    std::uint64_t budget_, nodes_ = 0;
    std::vector<char> left_;
    int remaining_ = 0;
    std::vector<int> verts_;
    std::vector<Edge> c0_edges_, rainbow_;
};

// P7 block: 2k vertices with a perfect c0 matching and an exactly-k-colour
// rainbow matching, as a union of alternating cycles of 2 or 3 colours.
std::optional<Gadget> p7_block(const Ctx& cx, int c0, int k, std::vector<char>& used_v, std::vector<char>& used_c,
                               std::uint64_t budget) {
    Gadget blk;
    auto local_v = used_v;
    auto local_c = used_c;
    int left = k;
    while (left > 0) {
        if (left == 1) return std::nullopt;
        int m = left == 3 ? 3 : 2;
        std::optional<Gadget> cyc;
        for (int s = 0; s < cx.A + cx.B && !cyc; ++s) cyc = alt_cycle(cx, s, c0, m, local_v, local_c, budget);
        if (!cyc) return std::nullopt;
        for (int v : cyc->vertices) local_v[v] = 1;
        for (int c : cyc->colours) local_c[c] = 1;
        blk.vertices.insert(blk.vertices.end(), cyc->vertices.begin(), cyc->vertices.end());
        blk.colours.insert(blk.colours.end(), cyc->colours.begin(), cyc->colours.end());
        blk.c0_edges.insert(blk.c0_edges.end(), cyc->c0_edges.begin(), cyc->c0_edges.end());
        blk.rainbow.insert(blk.rainbow.end(), cyc->rainbow.begin(), cyc->rainbow.end());
        left -= m;
    }
    used_v = std::move(local_v);
    used_c = std::move(local_c);
    return finish(blk);
}

std::string edge_text(const Edge& e) {
    return "a" + std::to_string(e.a) + "b" + std::to_string(e.b) + "/c" + std::to_string(e.colour);
}

struct Auditor {
    const ColouredBipartiteGraph& g;
    Ctx cx;
    int n;
    double p, eps, alpha;
    const AuditOptions& opts;

    PropertyResult p1() const {
        PropertyResult r;
        r.id = 1;
        int cc = g.colour_count();
        r.achieved = static_cast<std::uint64_t>(cc);
        r.passed = g.a_size() == n && g.b_size() == n && cc >= n && cc <= (1 + eps) * n + 1e-9;
        r.note = "|A|=" + std::to_string(g.a_size()) + " |B|=" + std::to_string(g.b_size()) +
                 " |C|=" + std::to_string(cc);
        return r;
    }

    PropertyResult p2() const {
        PropertyResult r;
        r.id = 2;
        auto rep = check_typical(build_hypergraph(g), n, p, eps);
        r.achieved = rep.violations.size();
        r.passed = rep.typical();
        r.instances = 3;
        if (!rep.typical()) {
            const auto& v = rep.violations.front();
            r.worst = v.projection + " " + v.kind + " " + std::to_string(v.u) + "," + std::to_string(v.v) +
                      " value " + std::to_string(v.value);
        }
        r.note = std::to_string(rep.violations.size()) + " typicality violations";
        return r;
    }

    PropertyResult p3() const {
        PropertyResult r;
        r.id = 3;
        r.quota = static_cast<double>(ceil_quota(alpha * n * n));
        r.allowance = std::sqrt(static_cast<double>(n));
        const bool exact = opts.mode == AuditMode::Exact;
        require(!exact || n <= opts.exact_cap,
                "audit_pseudorandom: P3 exact counting capped at n <= " + std::to_string(opts.exact_cap));
        const auto q = static_cast<std::uint64_t>(r.quota);
        r.achieved = UINT64_MAX;
        struct Cyc {
            int a2, b2;
        };
        for (int c : g.colours()) {
            const auto& ec = g.colour_class(c);
            // rainbow 4-cycles through each edge, keyed by the neighbouring colours
            std::vector<std::map<std::pair<int, int>, std::vector<Cyc>>> cyc(ec.size());
            for (std::size_t i = 0; i < ec.size(); ++i) {
                int a = ec[i].a, b = ec[i].b;
                for (int b2 : g.a_neighbours(a)) {
                    if (b2 == b) continue;
                    int x = g.colour_of(a, b2);
                    for (int a2 : g.b_neighbours(b)) {
                        if (a2 == a) continue;
                        int y = g.colour_of(a2, b);
                        int z = g.colour_of(a2, b2);
                        if (z == kEmpty || x == y || z == c) continue;
                        cyc[i][{std::min(x, y), std::max(x, y)}].push_back({a2, b2});
                    }
                }
            }
            for (std::size_t i = 0; i < ec.size(); ++i) {
                std::uint64_t bad = 0;
                for (std::size_t j = 0; j < ec.size(); ++j) {
                    if (i == j) continue;
                    ++r.instances;
                    std::uint64_t count = 0;
                    const int fa = ec[j].a, fbb = ec[j].b;
                    for (const auto& [key, list] : cyc[j]) {
                        auto it = cyc[i].find(key);
                        if (it == cyc[i].end()) continue;
                        for (const Cyc& s2 : list)
                            for (const Cyc& s1 : it->second) {
                                int a1[2] = {ec[i].a, s1.a2}, b1[2] = {ec[i].b, s1.b2};
                                int a2[2] = {fa, s2.a2}, b2[2] = {fbb, s2.b2};
                                bool clash = false;
                                for (int x : a1)
                                    for (int y : a2) clash = clash || x == y;
                                for (int x : b1)
                                    for (int y : b2) clash = clash || x == y;
                                if (!clash) ++count;
                            }
                        if (!exact && count >= q) break;
                    }
                    if (count < r.achieved) {
                        r.achieved = count;
                        r.worst = "e=" + edge_text(ec[i]) + " f=" + edge_text(ec[j]);
                    }
                    if (count < q) ++bad;
                }
                r.exceptions = std::max(r.exceptions, bad);
            }
        }
        if (r.achieved == UINT64_MAX) r.achieved = 0;
        r.passed = static_cast<double>(r.exceptions) <= r.allowance + 1e-9;
        r.note = "pairs (S1,S2) per (e,f); exceptional f per e at most sqrt(n)";
        return r;
    }

    PropertyResult p4() const {
        PropertyResult r;
        r.id = 4;
        r.quota = static_cast<double>(ceil_quota(alpha * n));
        r.achieved = UINT64_MAX;
        r.witness_colour_disjoint = true;
        for (int u = 0; u < cx.A; ++u)
            for (int v = 0; v < cx.B; ++v)
                for (int c0 : g.colours()) {
                    ++r.instances;
                    std::vector<char> used_v(cx.A + cx.B, 0), used_c(cx.bound, 0);
                    used_v[u] = used_v[cx.fb(v)] = 1;
                    used_c[c0] = 1;
                    std::vector<Gadget> fam;
                    while (auto x = p4_chain(cx, u, v, c0, used_v, used_c)) fam.push_back(*x);
                    if (fam.size() < r.achieved) {
                        r.achieved = fam.size();
                        r.worst = "u=a" + std::to_string(u) + " v=b" + std::to_string(v) + " c0=" + std::to_string(c0);
                        r.witnesses = fam;
                        r.witness_c0 = c0;
                        r.witness_extra = {u, cx.fb(v)};
                    }
                }
        if (r.achieved == UINT64_MAX) r.achieved = 0;
        r.passed = r.instances > 0 && static_cast<double>(r.achieved) >= r.quota;
        r.note = "greedy packing of chains u-w1-w2-w3-w4-v";
        return r;
    }

    PropertyResult p5() const {
        PropertyResult r;
        r.id = 5;
        r.quota = static_cast<double>(ceil_quota(alpha * n / 12.0));
        r.achieved = UINT64_MAX;
        r.witness_colour_disjoint = true;
        for (int c0 : g.colours())
            for (int d : g.colours()) {
                if (d == c0) continue;
                ++r.instances;
                std::vector<char> used_v(cx.A + cx.B, 0), used_c(cx.bound, 0);
                used_c[c0] = used_c[d] = 1;
                std::vector<Gadget> fam;
                for (const Edge& xy : g.colour_class(d)) {
                    int y = xy.a, x = xy.b;
                    int u = g.a_via(x, c0), v = g.b_via(y, c0);
                    if (u == kEmpty || v == kEmpty) continue;
                    if (used_v[y] || used_v[cx.fb(x)] || used_v[u] || used_v[cx.fb(v)]) continue;
                    auto tv = used_v;
                    tv[y] = tv[cx.fb(x)] = tv[u] = tv[cx.fb(v)] = 1;
                    auto tc = used_c;
                    auto chain = p4_chain(cx, u, v, c0, tv, tc);
                    if (!chain) continue;
                    used_v = std::move(tv);
                    used_c = std::move(tc);
                    Gadget gd = *chain;
                    gd.vertices.insert(gd.vertices.end(), {u, y, cx.fb(x), cx.fb(v)});
                    gd.colours.push_back(d);
                    gd.c0_edges.push_back({u, x, c0});
                    gd.c0_edges.push_back({y, v, c0});
                    gd.rainbow.push_back(xy);
                    fam.push_back(finish(gd));
                }
                if (fam.size() < r.achieved) {
                    r.achieved = fam.size();
                    r.worst = "c0=" + std::to_string(c0) + " d=" + std::to_string(d);
                    r.witnesses = fam;
                    r.witness_c0 = c0;
                    r.witness_d = d;
                }
            }
        if (r.achieved == UINT64_MAX) r.achieved = 0;
        r.passed = r.instances > 0 && static_cast<double>(r.achieved) >= r.quota;
        r.note = "greedy packing: c0-d-c0 path joined by a P4 chain";
        return r;
    }

    PropertyResult p6() const {
        PropertyResult r;
        r.id = 6;
        r.quota = static_cast<double>(ceil_quota(alpha * n));
        r.achieved = UINT64_MAX;
        const int colours = g.colour_count();
        const int kmax = std::min(20, (colours - 1) / 5);
        std::mt19937_64 rng(opts.seed ^ 0x6a09e667f3bcc909ULL);
        for (int c0 : g.colours()) {
            std::vector<int> others;
            for (int c : g.colours())
                if (c != c0) others.push_back(c);
            for (int k = 0; k <= kmax; ++k) {
                const int samples = k == 0 ? 1 : std::max(1, opts.p6_samples);
                for (int s = 0; s < samples; ++s) {
                    ++r.instances;
                    std::shuffle(others.begin(), others.end(), rng);
                    std::vector<char> allowed(cx.bound, 0);
                    for (int i = 0; i < 5 * k; ++i) allowed[others[i]] = 1;
                    auto fam = pack_paths(cx, c0, k, allowed, opts.search_budget);
                    if (fam.size() < r.achieved) {
                        r.achieved = fam.size();
                        std::vector<int> cbar;
                        for (int i = 0; i < 5 * k; ++i) cbar.push_back(others[i]);
                        std::sort(cbar.begin(), cbar.end());
                        r.worst = "c0=" + std::to_string(c0) + " k=" + std::to_string(k) + " |Cbar|=" +
                                  std::to_string(cbar.size());
                        r.witnesses = fam;
                        r.witness_c0 = c0;
                    }
                }
            }
        }
        if (r.achieved == UINT64_MAX) r.achieved = 0;
        r.passed = r.instances > 0 && static_cast<double>(r.achieved) >= r.quota;
        r.note = "k <= " + std::to_string(kmax) + ", |Cbar| = 5k sampled " + std::to_string(opts.p6_samples) +
                 " times per (c0,k); larger Cbar only adds choices";
        return r;
    }

    PropertyResult p7(int k) const {
        PropertyResult r;
        r.id = 7;
        r.quota = static_cast<double>(ceil_quota(alpha * alpha * n));
        const auto per_i = ceil_quota(alpha * n);
        r.achieved = UINT64_MAX;
        r.witness_colour_disjoint = true;
        if (k < 2) {
            r.achieved = 0;
            r.note = "no block size: k(k+1) <= |C|-1 forces k < 2";
            return r;
        }
        std::mt19937_64 rng(opts.seed ^ 0xbb67ae8584caa73bULL);
        for (int c0 : g.colours()) {
            std::vector<char> used_v(cx.A + cx.B, 0), used_c(cx.bound, 0);
            used_c[c0] = 1;
            std::vector<Gadget> blocks;
            while (auto b = p7_block(cx, c0, k, used_v, used_c, opts.search_budget)) blocks.push_back(*b);
            std::vector<int> others;
            for (int c : g.colours())
                if (c != c0) others.push_back(c);
            // Cbar samples: one hitting a colour of each of the first k blocks, then random ones
            std::vector<std::vector<int>> cbars;
            std::vector<int> hit;
            for (std::size_t i = 0; i < blocks.size() && static_cast<int>(hit.size()) < k; ++i)
                hit.push_back(blocks[i].colours[0]);
            cbars.push_back(hit);
            for (int s = 0; s < opts.p7_samples; ++s) {
                std::shuffle(others.begin(), others.end(), rng);
                int size = static_cast<int>(rng() % static_cast<std::uint64_t>(k + 1));
                cbars.emplace_back(others.begin(), others.begin() + size);
            }
            for (auto& cbar : cbars) {
                std::sort(cbar.begin(), cbar.end());
                ++r.instances;
                std::uint64_t good = 0;
                for (const auto& blk : blocks) {
                    bool meets = false;
                    for (int c : blk.colours) meets = meets || std::binary_search(cbar.begin(), cbar.end(), c);
                    if (meets) continue;
                    std::vector<int> want = blk.colours;
                    want.insert(want.end(), cbar.begin(), cbar.end());
                    std::vector<char> used(cx.A + cx.B, 0);
                    std::uint64_t found = 0;
                    while (found < per_i) {
                        auto x = ExactCover(cx, c0, want, used, opts.search_budget).run();
                        if (!x) break;
                        for (int v : x->vertices) used[v] = 1;
                        ++found;
                    }
                    if (found >= per_i) ++good;
                }
                if (good < r.achieved) {
                    r.achieved = good;
                    std::string s;
                    for (int c : cbar) s += (s.empty() ? "" : ",") + std::to_string(c);
                    r.worst = "c0=" + std::to_string(c0) + " r=" + std::to_string(blocks.size()) + " Cbar={" + s + "}";
                    r.witnesses = blocks;
                    r.witness_c0 = c0;
                }
            }
        }
        if (r.achieved == UINT64_MAX) r.achieved = 0;
        r.passed = r.instances > 0 && static_cast<double>(r.achieved) >= r.quota;
        r.note = "k=" + std::to_string(k) + ", blocks from alternating cycles, path plus cycles per Cbar, " + std::to_string(opts.p7_samples + 1) +
                 " Cbar samples per c0 (first one hits a colour of each of the first k blocks)";
        return r;
    }
};

}  // namespace

PseudorandomAudit audit_pseudorandom(const ColouredBipartiteGraph& graph, int n, double p, double epsilon, double alpha,
                                     const AuditOptions& opts) {
    require(n > 0, "audit_pseudorandom: n must be positive");
    require(p > 0 && p <= 1, "audit_pseudorandom: p must lie in (0,1]");
    require(epsilon >= 0 && alpha > 0, "audit_pseudorandom: need epsilon >= 0 and alpha > 0");
    PseudorandomAudit audit;
    audit.n = n;
    audit.p = p;
    audit.epsilon = epsilon;
    audit.alpha = alpha;
    audit.mode = opts.mode;
    audit.p7_k = p7_block_size(graph.colour_count());
    audit.p7_clipped = audit.p7_k < 100;

    Auditor au{graph, Ctx(graph), n, p, epsilon, alpha, opts};
    std::function<PropertyResult()> jobs[7] = {[&] { return au.p1(); }, [&] { return au.p2(); },
                                               [&] { return au.p3(); }, [&] { return au.p4(); },
                                               [&] { return au.p5(); }, [&] { return au.p6(); },
                                               [&] { return au.p7(audit.p7_k); }};
    std::vector<std::future<PropertyResult>> running(7);
    for (int i = 0; i < 7; ++i) {
        audit.props[i].id = i + 1;
        if (!opts.enabled[i]) continue;
        running[i] = std::async(opts.threads > 1 ? std::launch::async : std::launch::deferred, jobs[i]);
    }
    for (int i = 0; i < 7; ++i) {
        if (!opts.enabled[i]) continue;
        audit.props[i] = running[i].get();
        audit.props[i].checked = true;
    }
    if (audit.p7_clipped && opts.enabled[6])
        audit.props[6].note += "; k clipped from 100 to " + std::to_string(audit.p7_k);
    return audit;
}

}  // namespace tvl
