#include "tvl/absorption.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "tvl/errors.hpp"
#include "tvl/switchers.hpp"

namespace tvl {

namespace {

std::vector<int> sorted_unique(std::vector<int> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

std::vector<int> flat_ends(const ColouredBipartiteGraph& g, const Edge& e) { return {e.a, flat_b(g, e.b)}; }

bool disjoint_edges(const Edge& e, const Edge& f) { return e.a != f.a && e.b != f.b; }

std::string edge_str(const Edge& e) {
    return "(" + std::to_string(e.a) + "," + std::to_string(e.b) + ";" + std::to_string(e.colour) + ")";
}

// Vertex and colour flags that a construction must stay clear of.
struct Reserve {
    std::vector<char> v, c;
    Reserve(const ColouredBipartiteGraph& g, const std::vector<int>& fv, const std::vector<int>& fc)
        : v(g.vertex_count(), 0), c(g.colour_bound(), 0) {
        for (int x : fv)
            if (x >= 0 && x < g.vertex_count()) v[x] = 1;
        for (int x : fc)
            if (x >= 0 && x < g.colour_bound()) c[x] = 1;
    }
    void take(const std::vector<int>& verts, const std::vector<int>& cols) {
        for (int x : verts) v[x] = 1;
        for (int x : cols) c[x] = 1;
    }
};

// Built on first use; rainbow 4-cycle enumeration is the expensive part.
class LazyIndex {
public:
    explicit LazyIndex(const ColouredBipartiteGraph& g) : g_(g) {}
    const SwitcherIndex& get() {
        if (!idx_) idx_.emplace(g_);
        return *idx_;
    }

private:
    const ColouredBipartiteGraph& g_;
    std::optional<SwitcherIndex> idx_;
};

// Corner vertices for the edge pair under colours d (at the A end) and d2 (at
// the B end): w = d-neighbour of e.a, x = d2-neighbour of e.b.
struct Corners {
    int w1, x1, w2, x2;  // w in B, x in A (raw ids)
    int c1, c2;          // colours of x1w1 and x2w2
};

std::optional<Corners> corners(const ColouredBipartiteGraph& g, const Edge& e, const Edge& f, int d, int d2,
                               const Reserve& r) {
    Corners k;
    k.w1 = g.b_via(e.a, d);
    k.x1 = g.a_via(e.b, d2);
    k.w2 = g.b_via(f.a, d);
    k.x2 = g.a_via(f.b, d2);
    if (k.w1 == kEmpty || k.x1 == kEmpty || k.w2 == kEmpty || k.x2 == kEmpty) return std::nullopt;
    // B side: w1, w2, e.b, f.b distinct; A side: x1, x2, e.a, f.a distinct
    const int bs[4] = {k.w1, k.w2, e.b, f.b};
    const int as[4] = {k.x1, k.x2, e.a, f.a};
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            if (bs[i] == bs[j] || as[i] == as[j]) return std::nullopt;
    if (r.v[flat_b(g, k.w1)] || r.v[flat_b(g, k.w2)] || r.v[k.x1] || r.v[k.x2]) return std::nullopt;
    k.c1 = g.colour_of(k.x1, k.w1);
    k.c2 = g.colour_of(k.x2, k.w2);
    if (k.c1 == kEmpty || k.c2 == kEmpty) return std::nullopt;
    for (int c : {k.c1, k.c2})
        if (c == d || c == d2 || r.c[c]) return std::nullopt;
    if (k.c1 == e.colour || k.c2 == f.colour) return std::nullopt;
    return k;
}

EdgeSwitcher assemble(const ColouredBipartiteGraph& g, const Edge& e, const Edge& f, int d, int d2, const Corners& k,
                      const ColourSwitcher* patch) {
    EdgeSwitcher s;
    s.e = e;
    s.f = f;
    s.patched = patch != nullptr;
    s.vertices = {k.x1, k.x2, flat_b(g, k.w1), flat_b(g, k.w2)};
    s.colours = {d, d2, k.c1, k.c2};
    s.cover_e = {{e.a, k.w1, d}, {k.x1, e.b, d2}, {k.x2, k.w2, k.c2}};
    s.cover_f = {{f.a, k.w2, d}, {k.x2, f.b, d2}, {k.x1, k.w1, k.c1}};
    if (patch) {
        // m1 carries c1 into the e side, m2 carries c2 into the f side
        for (int v : switcher_vertices(g, *patch)) s.vertices.push_back(v);
        for (const Edge& x : patch->m1.edges) s.cover_e.push_back(x), s.colours.push_back(x.colour);
        for (const Edge& x : patch->m2.edges) s.cover_f.push_back(x), s.colours.push_back(x.colour);
    }
    s.vertices = sorted_unique(s.vertices);
    s.colours = sorted_unique(s.colours);
    std::sort(s.cover_e.begin(), s.cover_e.end());
    std::sort(s.cover_f.begin(), s.cover_f.end());
    return s;
}

// e and f need not share a colour here; the absorber pairs w_i x_i with its anchor.
std::optional<EdgeSwitcher> search_switcher(const ColouredBipartiteGraph& g, LazyIndex& idx, const Edge& e,
                                            const Edge& f, const Reserve& r, int max_order, std::mt19937_64& rng,
                                            std::uint64_t budget, std::string* why) {
    std::vector<int> cand;
    for (int c : g.colours())
        if (!r.c[c] && c != e.colour && c != f.colour) cand.push_back(c);
    std::shuffle(cand.begin(), cand.end(), rng);

    std::uint64_t pairs = 0, valid = 0;
    std::vector<std::tuple<int, int, Corners>> unequal;
    if (max_order >= 3) {
        for (int d : cand)
            for (int d2 : cand) {
                if (d == d2) continue;
                ++pairs;
                auto k = corners(g, e, f, d, d2, r);
                if (!k) continue;
                ++valid;
                if (k->c1 == k->c2) return assemble(g, e, f, d, d2, *k, nullptr);
                if (unequal.size() < 200) unequal.emplace_back(d, d2, *k);
            }
    }
    std::uint64_t patch_tries = 0;
    if (max_order >= 7) {
        for (const auto& [d, d2, k] : unequal) {
            ++patch_tries;
            std::vector<char> bv(r.v), bc(r.c);
            for (int v : {e.a, f.a, k.x1, k.x2}) bv[v] = 1;
            for (int v : {e.b, f.b, k.w1, k.w2}) bv[flat_b(g, v)] = 1;
            bc[d] = bc[d2] = 1;
            ColourSwitcher sw;
            if (find_chain_switcher(idx.get(), {k.c1, k.c2}, bv, bc, sw, budget) && 3 + sw.order() <= max_order)
                return assemble(g, e, f, d, d2, k, &sw);
        }
    }
    if (why)
        *why = "no switcher of order <= " + std::to_string(max_order) + " between " + edge_str(e) + " and " +
               edge_str(f) + ": " + std::to_string(pairs) + " (d,d') pairs, " + std::to_string(valid) +
               " with free distinct corners, none with equal corner colours; " + std::to_string(patch_tries) +
               " colour-switcher patches failed";
    return std::nullopt;
}

// Kuhn's augmenting paths for X into the allowed nodes; got[x] = node or -1.
int kuhn(const RobustTemplate& k, const std::vector<char>& allowed, std::vector<int>& got) {
    const int nodes = k.y_size() + k.z_size();
    std::vector<int> owner(nodes, -1);
    got.assign(k.h, -1);
    std::vector<char> seen;
    auto augment = [&](auto&& self, int x) -> bool {
        for (int y : k.adj[x]) {
            if (!allowed[y] || seen[y]) continue;
            seen[y] = 1;
            if (owner[y] < 0 || self(self, owner[y])) {
                owner[y] = x;
                got[x] = y;
                return true;
            }
        }
        return false;
    };
    int size = 0;
    for (int x = 0; x < k.h; ++x) {
        seen.assign(nodes, 0);
        size += augment(augment, x);
    }
    return size;
}

// Largest shortfall h - |matching| over all Z0; also counts the subsets.
int worst_deficiency(const RobustTemplate& k, std::uint64_t* checked) {
    const int ys = k.y_size(), zs = k.z_size(), pick = k.h / 3;
    int worst = 0;
    for (std::uint32_t mask = 0; mask < (1u << zs); ++mask) {
        if (std::popcount(mask) != pick) continue;
        std::vector<char> allowed(ys + zs, 0);
        std::fill(allowed.begin(), allowed.begin() + ys, 1);
        for (int z = 0; z < zs; ++z)
            if (mask >> z & 1) allowed[ys + z] = 1;
        if (checked) ++*checked;
        std::vector<int> got;
        worst = std::max(worst, k.h - kuhn(k, allowed, got));
    }
    return worst;
}

}  // namespace

std::optional<std::vector<Edge>> exact_rainbow_cover(const ColouredBipartiteGraph& g, const std::vector<int>& vertices,
                                                     const std::vector<int>& colours) {
    require(colours.size() <= 64, "exact_rainbow_cover: at most 64 colours");
    std::vector<int> as, bs;
    std::vector<char> seen(g.vertex_count(), 0);
    for (int v : vertices) {
        require(v >= 0 && v < g.vertex_count(), "exact_rainbow_cover: vertex out of range");
        require(!seen[v], "exact_rainbow_cover: repeated vertex");
        seen[v] = 1;
        if (v < g.a_size())
            as.push_back(v);
        else
            bs.push_back(v - g.a_size());
    }
    const auto cols = sorted_unique(colours);
    require(cols.size() == colours.size(), "exact_rainbow_cover: repeated colour");
    const std::size_t k = cols.size();
    if (as.size() != k || bs.size() != k) return std::nullopt;
    if (k == 0) return std::vector<Edge>{};
    std::map<int, int> cidx;
    for (std::size_t i = 0; i < k; ++i) cidx[cols[i]] = static_cast<int>(i);

    std::vector<std::vector<std::pair<int, int>>> opts(k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            int c = g.colour_of(as[i], bs[j]);
            if (c == kEmpty) continue;
            auto it = cidx.find(c);
            if (it != cidx.end()) opts[i].push_back({static_cast<int>(j), it->second});
        }
    const std::uint64_t full = k == 64 ? ~0ull : (1ull << k) - 1;
    std::uint64_t used_a = 0, used_b = 0, used_c = 0;
    std::vector<int> pick_b(k, -1), pick_c(k, -1);
    auto dfs = [&](auto&& self) -> bool {
        if (used_a == full) return true;
        int best = -1;
        std::size_t best_cnt = SIZE_MAX;
        std::uint64_t reach_b = 0, reach_c = 0;
        for (std::size_t i = 0; i < k; ++i) {
            if (used_a >> i & 1) continue;
            std::size_t cnt = 0;
            for (auto [j, c] : opts[i])
                if (!(used_b >> j & 1) && !(used_c >> c & 1)) {
                    ++cnt;
                    reach_b |= 1ull << j;
                    reach_c |= 1ull << c;
                }
            if (cnt == 0) return false;
            if (cnt < best_cnt) best_cnt = cnt, best = static_cast<int>(i);
        }
        if ((reach_b | used_b) != full || (reach_c | used_c) != full) return false;
        used_a |= 1ull << best;
        for (auto [j, c] : opts[best]) {
            if ((used_b >> j & 1) || (used_c >> c & 1)) continue;
            used_b |= 1ull << j;
            used_c |= 1ull << c;
            pick_b[best] = j;
            pick_c[best] = c;
            if (self(self)) return true;
            used_b &= ~(1ull << j);
            used_c &= ~(1ull << c);
        }
        used_a &= ~(1ull << best);
        return false;
    };
    if (!dfs(dfs)) return std::nullopt;
    std::vector<Edge> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back({as[i], bs[pick_b[i]], cols[pick_c[i]]});
    std::sort(out.begin(), out.end());
    return out;
}

EdgeSwitcher build_edge_switcher(const ColouredBipartiteGraph& g, const Edge& e, const Edge& f,
                                 const SwitcherSearch& search) {
    require(g.contains(e) && g.contains(f), "build_edge_switcher: e and f must be edges of the graph");
    require(e != f, "build_edge_switcher: e == f");
    require(e.colour == f.colour, "build_edge_switcher: e and f have different colours");
    require(disjoint_edges(e, f), "build_edge_switcher: e and f share a vertex");
    Reserve r(g, search.forbidden_vertices, search.forbidden_colours);
    std::mt19937_64 rng(search.seed);
    LazyIndex idx(g);
    std::string why;
    auto s = search_switcher(g, idx, e, f, r, search.max_order, rng, search.budget, &why);
    if (!s) throw SearchExhausted("edge_switcher", why);
    return *s;
}

std::string edge_switcher_problem(const ColouredBipartiteGraph& g, const EdgeSwitcher& s) {
    if (s.vertices.size() != 2 * s.colours.size() - 2) return "|V| != 2|C| - 2";
    if (sorted_unique(s.vertices).size() != s.vertices.size()) return "repeated vertex";
    if (sorted_unique(s.colours).size() != s.colours.size()) return "repeated colour";
    for (const Edge* t : {&s.e, &s.f}) {
        if (!g.contains(*t)) return "host edge " + edge_str(*t) + " missing";
        std::vector<int> v = s.vertices;
        for (int x : flat_ends(g, *t)) {
            if (std::count(v.begin(), v.end(), x)) return "switcher meets " + edge_str(*t);
            v.push_back(x);
        }
        if (!exact_rainbow_cover(g, v, s.colours)) return "no exactly-C-rainbow matching with " + edge_str(*t);
    }
    return "";
}

SwitchabilityReport verify_switchable(const ColouredBipartiteGraph& g, const Edge& e, const Edge& f, double beta, int k,
                                      int trials, std::uint64_t seed) {
    require(beta >= 0 && beta < 1, "verify_switchable: beta must lie in [0,1)");
    require(k >= 0 && trials >= 0, "verify_switchable: negative k or trials");
    SwitchabilityReport rep;
    rep.beta = beta;
    rep.k = k;
    rep.trials = trials;
    rep.forbidden_size = static_cast<std::size_t>(std::floor(beta * g.vertex_count() + 1e-9));
    std::vector<int> verts(g.vertex_count());
    std::iota(verts.begin(), verts.end(), 0);
    const std::vector<int>& cols = g.colours();
    for (int t = 0; t < trials; ++t) {
        std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                         static_cast<std::uint32_t>(t)};
        std::mt19937_64 rng(ss);
        SwitcherSearch s;
        s.max_order = k;
        s.seed = rng();
        std::vector<int> v = verts, c = cols;
        std::shuffle(v.begin(), v.end(), rng);
        std::shuffle(c.begin(), c.end(), rng);
        v.resize(std::min(v.size(), rep.forbidden_size));
        c.resize(std::min(c.size(), rep.forbidden_size));
        s.forbidden_vertices = v;
        s.forbidden_colours = c;
        try {
            auto sw = build_edge_switcher(g, e, f, s);
            ++rep.passes;
            rep.orders.push_back(sw.order());
        } catch (const SearchExhausted& ex) {
            rep.certificates.push_back("trial " + std::to_string(t) + ": " + ex.what());
        }
    }
    return rep;
}

Absorber build_absorber(const ColouredBipartiteGraph& g, const std::vector<Edge>& targets, const AbsorberOptions& opts) {
    require(!targets.empty(), "build_absorber: no targets");
    const int c0 = targets[0].colour;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        require(g.contains(targets[i]), "build_absorber: target " + edge_str(targets[i]) + " is not an edge");
        require(targets[i].colour == c0, "build_absorber: targets must share one colour");
        for (std::size_t j = 0; j < i; ++j)
            require(disjoint_edges(targets[i], targets[j]), "build_absorber: targets must be vertex-disjoint");
    }
    const std::size_t t = targets.size();
    Reserve base(g, opts.forbidden_vertices, opts.forbidden_colours);
    for (const Edge& e : targets) base.take(flat_ends(g, e), {c0});

    std::mt19937_64 rng(opts.seed);
    LazyIndex idx(g);
    std::vector<int> cand;
    for (int c : g.colours())
        if (!base.c[c]) cand.push_back(c);
    std::shuffle(cand.begin(), cand.end(), rng);

    std::string stage = "absorber/cycles", why = "no (d,d') pair gives disjoint free 4-cycles on every target";
    int pairs = 0;
    for (int d : cand)
        for (int d2 : cand) {
            if (d == d2 || (opts.max_colour_pairs && pairs >= opts.max_colour_pairs)) continue;
            ++pairs;
            // 4-cycles u_i v_i x_i w_i with colours c0, d2, c'_i, d
            std::vector<int> w(t), x(t), cc(t);
            std::vector<int> cyc;
            bool ok = true;
            for (std::size_t i = 0; i < t && ok; ++i) {
                w[i] = g.b_via(targets[i].a, d);
                x[i] = g.a_via(targets[i].b, d2);
                ok = w[i] != kEmpty && x[i] != kEmpty;
                if (!ok) break;
                cc[i] = g.colour_of(x[i], w[i]);
                ok = cc[i] != kEmpty && cc[i] != d && cc[i] != d2 && cc[i] != c0;
                for (int v : {x[i], flat_b(g, w[i])}) {
                    ok = ok && !base.v[v] && !std::count(cyc.begin(), cyc.end(), v);
                    cyc.push_back(v);
                }
            }
            if (!ok) continue;

            auto finish = [&](const std::vector<EdgeSwitcher>& sw, const std::optional<Edge>& anchor) {
                Absorber a;
                a.targets = targets;
                a.colours = {d, d2};
                for (std::size_t i = 0; i < t; ++i) a.vertices.push_back(x[i]), a.vertices.push_back(flat_b(g, w[i]));
                if (anchor) a.vertices.push_back(anchor->a), a.vertices.push_back(flat_b(g, anchor->b));
                for (const auto& s : sw) {
                    a.vertices.insert(a.vertices.end(), s.vertices.begin(), s.vertices.end());
                    a.colours.insert(a.colours.end(), s.colours.begin(), s.colours.end());
                }
                a.vertices = sorted_unique(a.vertices);
                a.colours = sorted_unique(a.colours);
                // sw[j] pairs cycle j (anchored) or cycle j+1 (anchorless) with the anchor
                const std::size_t first = anchor ? 0 : 1;
                for (std::size_t i = 0; i < t; ++i) {
                    std::vector<Edge> m = {{targets[i].a, w[i], d}, {x[i], targets[i].b, d2}};
                    for (std::size_t j = 0; j < sw.size(); ++j) {
                        const auto& part = (j + first == i) ? sw[j].cover_f : sw[j].cover_e;
                        m.insert(m.end(), part.begin(), part.end());
                    }
                    std::sort(m.begin(), m.end());
                    a.covers.push_back(std::move(m));
                }
                return a;
            };

            if (t == 1) return finish({}, std::nullopt);

            Reserve r = base;
            r.take(cyc, {d, d2});
            std::vector<Edge> anchors;
            if (opts.anchor) {
                stage = "absorber/anchor";
                why = "no free anchor edge";
                std::vector<Edge> same, other;
                for (const Edge& e : g.edges()) {
                    if (r.v[e.a] || r.v[flat_b(g, e.b)] || r.c[e.colour]) continue;
                    (e.colour == cc[0] ? same : other).push_back(e);
                }
                std::shuffle(same.begin(), same.end(), rng);
                std::shuffle(other.begin(), other.end(), rng);
                same.resize(std::min<std::size_t>(same.size(), 8));
                other.resize(std::min<std::size_t>(other.size(), opts.max_switcher_order >= 7 ? 4 : 0));
                anchors = same;
                anchors.insert(anchors.end(), other.begin(), other.end());
            } else {
                anchors.push_back({x[0], w[0], cc[0]});
            }
            for (const Edge& anc : anchors) {
                Reserve rr = r;
                if (opts.anchor) rr.take(flat_ends(g, anc), {});
                std::vector<EdgeSwitcher> sw;
                for (std::size_t i = opts.anchor ? 0 : 1; i < t; ++i) {
                    std::string w_why;
                    auto s = search_switcher(g, idx, Edge{x[i], w[i], cc[i]}, anc, rr, opts.max_switcher_order, rng,
                                             opts.budget, &w_why);
                    if (!s) {
                        stage = "absorber/switchers";
                        why = "target " + std::to_string(i) + ": " + w_why;
                        break;
                    }
                    rr.take(s->vertices, s->colours);
                    sw.push_back(std::move(*s));
                }
                if (sw.size() == (opts.anchor ? t : t - 1)) {
                    auto a = finish(sw, opts.anchor ? std::optional<Edge>(anc) : std::nullopt);
                    if (auto p = absorber_problem(g, a); !p.empty())
                        throw std::logic_error("build_absorber: constructed absorber fails validation: " + p);
                    return a;
                }
            }
        }
    throw SearchExhausted(stage, why + " (" + std::to_string(pairs) + " colour pairs tried)");
}

std::string absorber_problem(const ColouredBipartiteGraph& g, const Absorber& a, int threads) {
    if (a.targets.empty()) return "no targets";
    if (a.vertices.size() != 2 * a.colours.size() - 2) return "|V| != 2|C| - 2";
    if (sorted_unique(a.vertices).size() != a.vertices.size()) return "repeated vertex";
    if (sorted_unique(a.colours).size() != a.colours.size()) return "repeated colour";
    for (const Edge& e : a.targets) {
        if (!g.contains(e)) return "target " + edge_str(e) + " missing";
        for (int v : flat_ends(g, e))
            if (std::binary_search(a.vertices.begin(), a.vertices.end(), v)) return "absorber meets " + edge_str(e);
    }
    std::vector<std::string> bad(a.targets.size());
    auto work = [&](std::size_t part, std::size_t parts) {
        for (std::size_t i = part; i < a.targets.size(); i += parts) {
            std::vector<int> v = a.vertices;
            for (int x : flat_ends(g, a.targets[i])) v.push_back(x);
            if (!exact_rainbow_cover(g, v, a.colours))
                bad[i] = "no exactly-C-rainbow matching with " + edge_str(a.targets[i]);
        }
    };
    const std::size_t n = static_cast<std::size_t>(std::max(1, threads));
    if (n == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t p = 0; p < n; ++p) pool.emplace_back(work, p, n);
        for (auto& th : pool) th.join();
    }
    for (const auto& b : bad)
        if (!b.empty()) return b;
    return "";
}

int RobustTemplate::max_degree() const {
    std::vector<int> deg(y_size() + z_size(), 0);
    int best = 0;
    for (const auto& row : adj) {
        best = std::max(best, static_cast<int>(row.size()));
        for (int y : row) best = std::max(best, ++deg[y]);
    }
    return best;
}

std::size_t RobustTemplate::edge_count() const {
    std::size_t m = 0;
    for (const auto& row : adj) m += row.size();
    return m;
}

std::optional<std::vector<int>> template_matching(const RobustTemplate& k, const std::vector<int>& z0) {
    require(static_cast<int>(z0.size()) == k.h / 3, "template_matching: |Z0| must be h/3");
    std::vector<char> allowed(k.y_size() + k.z_size(), 0);
    std::fill(allowed.begin(), allowed.begin() + k.y_size(), 1);
    for (int z : z0) {
        require(z >= 0 && z < k.z_size(), "template_matching: Z node out of range");
        require(!allowed[k.y_size() + z], "template_matching: repeated Z node");
        allowed[k.y_size() + z] = 1;
    }
    std::vector<int> got;
    if (kuhn(k, allowed, got) < k.h) return std::nullopt;
    return got;
}

std::string template_problem(const RobustTemplate& k) {
    if (k.h < 3 || k.h % 3) return "h must be a positive multiple of 3";
    if (static_cast<int>(k.adj.size()) != k.h) return "adjacency has the wrong number of rows";
    if (k.max_degree() > kAsymptoticFanIn) return "max degree above " + std::to_string(kAsymptoticFanIn);
    if (int d = worst_deficiency(k, nullptr); d > 0) return "some Z0 leaves " + std::to_string(d) + " of X unmatched";
    return "";
}

RobustTemplate build_template(int h, std::uint64_t seed, const TemplateOptions& opts) {
    require(h >= 3 && h % 3 == 0, "build_template: h must be a positive multiple of 3");
    require(h <= opts.cap, "build_template: h above the exhaustive verification cap " + std::to_string(opts.cap));
    require(opts.degree >= 1 && opts.attempts >= 1 && opts.samples >= 1,
            "build_template: degree, attempts and samples must be positive");
    std::mt19937_64 rng(seed);
    RobustTemplate k;
    k.h = h;
    const int nodes = k.y_size() + k.z_size();
    std::vector<int> all(nodes);
    std::iota(all.begin(), all.end(), 0);
    const int deg = std::min({opts.degree, nodes, kAsymptoticFanIn});
    int best = h + 1;
    std::optional<RobustTemplate> keep;
    int found = 0;
    for (int att = 1; att <= opts.attempts && found < opts.samples; ++att) {
        k.adj.assign(h, {});
        for (auto& row : k.adj) {
            std::shuffle(all.begin(), all.end(), rng);
            row.assign(all.begin(), all.begin() + deg);
            std::sort(row.begin(), row.end());
        }
        int d = worst_deficiency(k, &k.subsets_checked);
        best = std::min(best, d);
        if (d > 0) continue;
        ++found;
        k.attempts_used = att;
        if (opts.prune) {
            std::vector<std::pair<int, int>> edges;
            for (int x = 0; x < h; ++x)
                for (int y : k.adj[x]) edges.push_back({x, y});
            std::shuffle(edges.begin(), edges.end(), rng);
            for (auto [x, y] : edges) {
                auto& row = k.adj[x];
                if (row.size() == 1) continue;
                auto it = std::find(row.begin(), row.end(), y);
                row.erase(it);
                if (worst_deficiency(k, &k.subsets_checked) > 0) row.insert(std::lower_bound(row.begin(), row.end(), y), y);
            }
        }
        if (!keep || k.edge_count() < keep->edge_count()) keep = k;
    }
    if (!keep)
        throw SearchExhausted("template", "no verified template in " + std::to_string(opts.attempts) +
                                              " attempts, best deficiency " + std::to_string(best));
    keep->subsets_checked = k.subsets_checked;
    if (keep->max_degree() > kAsymptoticFanIn) throw std::logic_error("build_template: degree bound broken");
    return *keep;
}

std::vector<Edge> DistributiveAbsorber::absorb(const std::vector<Edge>& chosen) const {
    require(static_cast<int>(chosen.size()) == m0, "absorb: need exactly m0 edges");
    std::set<Edge> pick(chosen.begin(), chosen.end());
    require(pick.size() == chosen.size(), "absorb: repeated edge");
    for (const Edge& e : chosen)
        require(std::count(targets.begin(), targets.end(), e), "absorb: " + edge_str(e) + " is not a target");
    std::vector<int> z0;
    for (std::size_t i = 0; i < edges_z.size(); ++i) {
        bool is_target = std::count(targets.begin(), targets.end(), edges_z[i]) > 0;
        if (!is_target || pick.count(edges_z[i])) z0.push_back(z_node[i]);
    }
    auto phi = template_matching(templ, z0);
    if (!phi) throw std::logic_error("absorb: template lost its matching property");
    std::vector<Edge> out;
    for (int x = 0; x < templ.h; ++x) {
        const auto& nodes = part_edge[x];
        auto it = std::find(nodes.begin(), nodes.end(), (*phi)[x]);
        if (it == nodes.end()) throw std::logic_error("absorb: matched node has no absorber target");
        const auto& m = parts[x].covers[it - nodes.begin()];
        out.insert(out.end(), m.begin(), m.end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

DistributiveAbsorber distributive_absorber(const ColouredBipartiteGraph& g, const std::vector<Edge>& targets, int m0,
                                           const RobustTemplate& templ, const DistributiveOptions& opts) {
    require(template_problem(templ).empty(), "distributive_absorber: template does not verify");
    require(!targets.empty(), "distributive_absorber: no targets");
    const int m1 = static_cast<int>(targets.size());
    const int h = templ.h;
    require(m0 >= 0 && m0 <= m1, "distributive_absorber: need 0 <= m0 <= m1");
    require(m1 - m0 <= h / 3, "distributive_absorber: template too small, need m1 - m0 <= h/3");
    const int c0 = targets[0].colour;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        require(g.contains(targets[i]) && targets[i].colour == c0,
                "distributive_absorber: targets must be edges of one colour");
        for (std::size_t j = 0; j < i; ++j)
            require(disjoint_edges(targets[i], targets[j]), "distributive_absorber: targets must be vertex-disjoint");
    }
    std::mt19937_64 rng(opts.seed);
    Reserve used(g, opts.forbidden_vertices, opts.forbidden_colours);
    for (const Edge& e : targets) used.take(flat_ends(g, e), {});

    // E_Y and the padding of E_Z: further colour-c0 edges on free vertices
    std::vector<Edge> pool;
    for (const Edge& e : g.colour_class(c0))
        if (!used.v[e.a] && !used.v[flat_b(g, e.b)]) pool.push_back(e);
    std::shuffle(pool.begin(), pool.end(), rng);
    const int ys = templ.y_size(), zs = templ.z_size();
    const int z_used = h / 3 + m1 - m0;
    const std::size_t extra = static_cast<std::size_t>(ys + z_used - m1);
    if (pool.size() < extra)
        throw SearchExhausted("distributive/edges", "need " + std::to_string(extra) + " more colour-" +
                                                        std::to_string(c0) + " edges, found " +
                                                        std::to_string(pool.size()));
    DistributiveAbsorber d;
    d.targets = targets;
    d.m0 = m0;
    d.templ = templ;
    d.edges_y.assign(pool.begin(), pool.begin() + ys);
    d.edges_z = targets;
    d.edges_z.insert(d.edges_z.end(), pool.begin() + ys, pool.begin() + static_cast<std::ptrdiff_t>(extra));
    for (std::size_t i = 0; i < extra; ++i) used.take(flat_ends(g, pool[i]), {});

    // keep the lowest-degree Z nodes, the rest are discarded with their edges
    std::vector<int> zdeg(zs, 0);
    for (const auto& row : templ.adj)
        for (int y : row)
            if (y >= ys) ++zdeg[y - ys];
    std::vector<int> zorder(zs);
    std::iota(zorder.begin(), zorder.end(), 0);
    std::stable_sort(zorder.begin(), zorder.end(), [&](int a, int b) { return zdeg[a] < zdeg[b]; });
    d.z_node.assign(zorder.begin(), zorder.begin() + z_used);
    std::map<int, Edge> node_edge;
    for (int j = 0; j < ys; ++j) node_edge[j] = d.edges_y[j];
    for (int i = 0; i < z_used; ++i) node_edge[ys + d.z_node[i]] = d.edges_z[i];

    d.parts.resize(h);
    d.part_edge.resize(h);
    std::vector<int> order(h);
    std::iota(order.begin(), order.end(), 0);
    for (int x = 0; x < h; ++x)
        for (int y : templ.adj[x])
            if (node_edge.count(y)) d.part_edge[x].push_back(y);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return d.part_edge[a].size() > d.part_edge[b].size(); });
    for (int x : order) {
        require(!d.part_edge[x].empty(), "distributive_absorber: template node with no live neighbour");
        std::vector<Edge> ex;
        for (int y : d.part_edge[x]) ex.push_back(node_edge[y]);
        AbsorberOptions ao;
        ao.anchor = opts.anchor;
        ao.max_switcher_order = opts.max_switcher_order;
        ao.seed = rng();
        for (int v = 0; v < g.vertex_count(); ++v)
            if (used.v[v]) ao.forbidden_vertices.push_back(v);
        for (int c = 0; c < g.colour_bound(); ++c)
            if (used.c[c]) ao.forbidden_colours.push_back(c);
        try {
            d.parts[x] = build_absorber(g, ex, ao);
        } catch (const SearchExhausted& ex_) {
            throw SearchExhausted("distributive/" + ex_.stage(), "x = " + std::to_string(x) + ", " + ex_.what());
        }
        used.take(d.parts[x].vertices, d.parts[x].colours);
    }

    for (const Edge& e : d.edges_y)
        for (int v : flat_ends(g, e)) d.vertices.push_back(v);
    for (const Edge& e : d.edges_z)
        if (!std::count(targets.begin(), targets.end(), e))
            for (int v : flat_ends(g, e)) d.vertices.push_back(v);
    for (const auto& p : d.parts) {
        d.vertices.insert(d.vertices.end(), p.vertices.begin(), p.vertices.end());
        d.colours.insert(d.colours.end(), p.colours.begin(), p.colours.end());
    }
    d.vertices = sorted_unique(d.vertices);
    d.colours = sorted_unique(d.colours);
    if (d.vertices.size() != 2 * d.colours.size() - 2 * static_cast<std::size_t>(m0))
        throw std::logic_error("distributive_absorber: |V_abs| != 2|C_abs| - 2 m0");
    return d;
}

std::string distributive_problem(const ColouredBipartiteGraph& g, const DistributiveAbsorber& d, int threads,
                                 std::size_t max_subsets) {
    if (d.vertices.size() + 2 * static_cast<std::size_t>(d.m0) != 2 * d.colours.size()) return "|V_abs| != 2|C_abs| - 2 m0";
    if (auto p = template_problem(d.templ); !p.empty()) return "template: " + p;
    std::vector<int> vs, cs;
    for (std::size_t x = 0; x < d.parts.size(); ++x) {
        if (auto p = absorber_problem(g, d.parts[x], threads); !p.empty()) return "part " + std::to_string(x) + ": " + p;
        vs.insert(vs.end(), d.parts[x].vertices.begin(), d.parts[x].vertices.end());
        cs.insert(cs.end(), d.parts[x].colours.begin(), d.parts[x].colours.end());
    }
    if (sorted_unique(vs).size() != vs.size()) return "parts share a vertex";
    if (sorted_unique(cs).size() != cs.size()) return "parts share a colour";
    if (sorted_unique(cs) != d.colours) return "C_abs is not the union of the part colours";

    const std::size_t m1 = d.targets.size();
    std::vector<int> sel(m1, 0);
    std::fill(sel.begin(), sel.begin() + d.m0, 1);
    std::sort(sel.begin(), sel.end());
    std::size_t done = 0;
    do {
        if (max_subsets && done >= max_subsets) break;
        ++done;
        std::vector<Edge> chosen;
        for (std::size_t i = 0; i < m1; ++i)
            if (sel[i]) chosen.push_back(d.targets[i]);
        auto m = d.absorb(chosen);
        std::string tag = "absorb of " + std::to_string(chosen.size()) + " edges";
        if (auto p = rainbow_matching_problem(g, m); !p.empty()) return tag + ": " + p;
        std::vector<int> cols, verts;
        for (const Edge& e : m) cols.push_back(e.colour), verts.push_back(e.a), verts.push_back(flat_b(g, e.b));
        if (sorted_unique(cols) != d.colours) return tag + ": colours differ from C_abs";
        std::vector<int> want = d.vertices;
        for (const Edge& e : chosen)
            for (int v : flat_ends(g, e)) want.push_back(v);
        if (sorted_unique(verts) != sorted_unique(want)) return tag + ": vertex set differs from V_abs + V(E')";
    } while (std::next_permutation(sel.begin(), sel.end()));
    return "";
}

std::string addition_state_problem(const ColouredBipartiteGraph& g, const AdditionState& s) {
    std::vector<char> seen(g.vertex_count(), 0);
    auto mark = [&](int v) {
        if (seen[v]) return false;
        seen[v] = 1;
        return true;
    };
    for (const Edge& e : s.m_id) {
        if (!g.contains(e) || e.colour != s.c0) return "m_id edge " + edge_str(e) + " is not a colour-c0 edge";
        if (!mark(e.a) || !mark(flat_b(g, e.b))) return "vertex repeated at " + edge_str(e);
    }
    if (auto p = rainbow_matching_problem(g, s.m_rb); !p.empty()) return "m_rb: " + p;
    for (const Edge& e : s.m_rb) {
        if (e.colour == s.c0) return "m_rb uses the identity colour";
        if (!mark(e.a) || !mark(flat_b(g, e.b))) return "vertex repeated at " + edge_str(e);
    }
    if (s.rem_a < 0 || s.rem_a >= g.a_size() || s.rem_b < 0 || s.rem_b >= g.b_size()) return "remainder out of range";
    if (!mark(s.rem_a) || !mark(flat_b(g, s.rem_b))) return "remainder vertex already covered";
    return "";
}

AdditionState init_addition_state(const ColouredBipartiteGraph& g, int c0, int id_edges, int rb_edges, int block,
                                  std::uint64_t seed, const std::vector<int>& forbidden_vertices) {
    require(block >= 2, "init_addition_state: block must be at least 2");
    require(id_edges >= 0 && rb_edges >= 0 && rb_edges % block == 0,
            "init_addition_state: rb_edges must be a non-negative multiple of block");
    require(c0 >= 0 && c0 < g.colour_bound(), "init_addition_state: c0 out of range");
    std::mt19937_64 rng(seed);
    Reserve r(g, forbidden_vertices, {c0});
    AdditionState s;
    s.c0 = c0;
    std::vector<Edge> ids = g.colour_class(c0);
    auto free_edge = [&](const Edge& e) { return !r.v[e.a] && !r.v[flat_b(g, e.b)]; };
    const int blocks = rb_edges / block;
    int made = 0;
    for (long tries = 0; made < blocks && tries < 200000; ++tries) {
        std::vector<Edge> free;
        for (const Edge& e : ids)
            if (free_edge(e)) free.push_back(e);
        if (static_cast<int>(free.size()) < block) break;
        std::shuffle(free.begin(), free.end(), rng);
        // rainbow edges a_i -> b_{i+1} close the c0 edges into one alternating cycle
        std::vector<Edge> rb;
        std::vector<int> cols;
        bool ok = true;
        for (int i = 0; i < block && ok; ++i) {
            int a = free[i].a, b = free[(i + 1) % block].b;
            int c = g.colour_of(a, b);
            ok = c != kEmpty && !r.c[c] && !std::count(cols.begin(), cols.end(), c);
            if (ok) rb.push_back({a, b, c}), cols.push_back(c);
        }
        if (!ok) continue;
        for (int i = 0; i < block; ++i) r.take(flat_ends(g, free[i]), {});
        r.take({}, cols);
        s.m_rb.insert(s.m_rb.end(), rb.begin(), rb.end());
        ++made;
    }
    if (made < blocks)
        throw SearchExhausted("addition/init", "found " + std::to_string(made) + " of " + std::to_string(blocks) +
                                                   " rainbow blocks");
    std::vector<Edge> free;
    for (const Edge& e : ids)
        if (free_edge(e)) free.push_back(e);
    std::shuffle(free.begin(), free.end(), rng);
    if (static_cast<int>(free.size()) < id_edges)
        throw SearchExhausted("addition/init", "only " + std::to_string(free.size()) + " free colour-c0 edges");
    s.m_id.assign(free.begin(), free.begin() + id_edges);
    for (const Edge& e : s.m_id) r.take(flat_ends(g, e), {});
    std::vector<int> fa, fb;
    for (int a = 0; a < g.a_size(); ++a)
        if (!r.v[a]) fa.push_back(a);
    for (int b = 0; b < g.b_size(); ++b)
        if (!r.v[flat_b(g, b)]) fb.push_back(b);
    if (fa.empty() || fb.empty()) throw SearchExhausted("addition/init", "no free remainder vertices");
    s.rem_a = fa[rng() % fa.size()];
    s.rem_b = fb[rng() % fb.size()];
    std::sort(s.m_id.begin(), s.m_id.end());
    std::sort(s.m_rb.begin(), s.m_rb.end());
    return s;
}

namespace {

// Path (w ... z) plus cycles alternating between m_id edges and rainbow edges
// whose colours are exactly the needed set.
class F3Search {
public:
    F3Search(const ColouredBipartiteGraph& g, const std::vector<Edge>& m_id, const std::vector<char>& blocked,
             const std::vector<int>& need, std::uint64_t budget, std::mt19937_64& rng)
        : g_(g), m_id_(m_id), used_(blocked), need_(need), budget_(budget), rng_(rng) {
        by_a_.assign(g.a_size(), -1);
        for (std::size_t i = 0; i < m_id.size(); ++i) by_a_[m_id[i].a] = static_cast<int>(i);
        want_.assign(g.colour_bound(), 0);
        for (int c : need) want_[c] = 1;
        left_ = static_cast<int>(need.size());
    }

    bool run() {
        std::vector<int> starts;
        for (std::size_t i = 0; i < m_id_.size(); ++i)
            if (!used_[i]) starts.push_back(static_cast<int>(i));
        std::shuffle(starts.begin(), starts.end(), rng_);
        for (int i : starts) {
            take_id(i);
            w_ = m_id_[i].a;
            if (path(i)) return true;
            drop_id();
            if (out_of_budget()) return false;
        }
        return false;
    }

    std::vector<int> e3;
    std::vector<Edge> f3;
    int w_ = -1, z_ = -1;
    std::uint64_t nodes = 0;

private:
    bool out_of_budget() const { return nodes >= budget_; }
    void take_id(int i) { used_[i] = 1, e3.push_back(i); }
    void drop_id() { used_[e3.back()] = 0, e3.pop_back(); }
    void take_rb(const Edge& e) { want_[e.colour] = 0, --left_, f3.push_back(e); }
    void drop_rb() { want_[f3.back().colour] = 1, ++left_, f3.pop_back(); }

    bool path(int cur) {
        if (out_of_budget()) return false;
        ++nodes;
        const int b = m_id_[cur].b;
        z_ = b;
        if (cycles()) return true;
        for (int c : need_) {
            if (!want_[c]) continue;
            int a = g_.a_via(b, c);
            if (a == kEmpty || by_a_[a] < 0 || used_[by_a_[a]]) continue;
            take_rb({a, b, c});
            take_id(by_a_[a]);
            if (path(by_a_[a])) return true;
            drop_id();
            drop_rb();
        }
        return false;
    }

    bool cycles() {
        if (left_ == 0) return true;
        if (out_of_budget()) return false;
        ++nodes;
        int c = -1;
        for (int x : need_)
            if (want_[x]) {
                c = x;
                break;
            }
        for (std::size_t st = 0; st < m_id_.size(); ++st) {
            if (used_[st]) continue;
            const int b = m_id_[st].b;
            int a = g_.a_via(b, c);
            if (a == kEmpty || by_a_[a] < 0 || used_[by_a_[a]] || by_a_[a] == static_cast<int>(st)) continue;
            take_id(static_cast<int>(st));
            take_rb({a, b, c});
            take_id(by_a_[a]);
            if (cycle(static_cast<int>(st), by_a_[a])) return true;
            drop_id();
            drop_rb();
            drop_id();
        }
        return false;
    }

    bool cycle(int st, int cur) {
        if (out_of_budget()) return false;
        ++nodes;
        const int b = m_id_[cur].b;
        for (int c : need_) {
            if (!want_[c]) continue;
            int a = g_.a_via(b, c);
            if (a == kEmpty) continue;
            if (a == m_id_[st].a) {
                take_rb({a, b, c});
                if (cycles()) return true;
                drop_rb();
                continue;
            }
            if (by_a_[a] < 0 || used_[by_a_[a]]) continue;
            take_rb({a, b, c});
            take_id(by_a_[a]);
            if (cycle(st, by_a_[a])) return true;
            drop_id();
            drop_rb();
        }
        return false;
    }

    const ColouredBipartiteGraph& g_;
    const std::vector<Edge>& m_id_;
    std::vector<char> used_;
    std::vector<int> need_;
    std::vector<char> want_;
    std::vector<int> by_a_;
    int left_ = 0;
    std::uint64_t budget_;
    std::mt19937_64& rng_;
};

struct HalfPath {
    int i, j;           // m_id indices
    std::array<Edge, 3> f;
};

}  // namespace

AdditionStep addition_step(const ColouredBipartiteGraph& g, const AdditionState& state, int x, int y,
                           const AdditionOptions& opts) {
    if (auto p = addition_state_problem(g, state); !p.empty()) throw PreconditionError("addition_step: " + p);
    require(x >= 0 && x < g.a_size() && y >= 0 && y < g.b_size(), "addition_step: x must be in A and y in B");
    std::vector<char> covered(g.vertex_count(), 0);
    for (const auto* m : {&state.m_id, &state.m_rb})
        for (const Edge& e : *m) covered[e.a] = covered[flat_b(g, e.b)] = 1;
    covered[state.rem_a] = covered[flat_b(g, state.rem_b)] = 1;
    require(!covered[x] && !covered[flat_b(g, y)], "addition_step: x and y must lie outside the state");
    const int c0 = state.c0;
    if (state.m_id.size() < 4)
        throw SearchExhausted("stage i", "E1 needs 4 colour-c0 edges, m_id has " + std::to_string(state.m_id.size()));

    const auto& mid = state.m_id;
    const auto& mrb = state.m_rb;
    std::vector<int> rb_by_colour(g.colour_bound(), -1), rb_by_a(g.a_size(), -1);
    for (std::size_t i = 0; i < mrb.size(); ++i) rb_by_colour[mrb[i].colour] = rb_by_a[mrb[i].a] = static_cast<int>(i);

    // closed alternating block through each m_rb edge (rb indices), empty if open
    std::vector<std::vector<int>> block(mrb.size());
    std::vector<std::vector<Edge>> block_c0(mrb.size());
    for (std::size_t r = 0; r < mrb.size(); ++r) {
        int cur = static_cast<int>(r);
        std::vector<int> seq;
        std::vector<Edge> ids;
        for (int step = 0; step < opts.max_block; ++step) {
            seq.push_back(cur);
            int b = mrb[cur].b;
            int a = g.a_via(b, c0);
            if (a == kEmpty || rb_by_a[a] < 0) break;
            ids.push_back({a, b, c0});
            cur = rb_by_a[a];
            if (cur == static_cast<int>(r)) {
                block[r] = seq;
                block_c0[r] = ids;
                break;
            }
        }
    }
    auto usable = [&](int c) { return c != kEmpty && c != c0 && rb_by_colour[c] >= 0 && !block[rb_by_colour[c]].empty(); };

    std::mt19937_64 rng(opts.seed);
    // start (B) -> m_id edge i -> m_id edge j -> end (A), 3 rainbow edges
    auto half_paths = [&](int start_b, int end_a) {
        std::vector<HalfPath> out;
        for (std::size_t i = 0; i < mid.size(); ++i)
            for (std::size_t j = 0; j < mid.size(); ++j) {
                if (i == j) continue;
                Edge f1{mid[i].a, start_b, g.colour_of(mid[i].a, start_b)};
                Edge f2{mid[j].a, mid[i].b, g.colour_of(mid[j].a, mid[i].b)};
                Edge f3{end_a, mid[j].b, g.colour_of(end_a, mid[j].b)};
                if (!usable(f1.colour) || !usable(f2.colour) || !usable(f3.colour)) continue;
                if (f1.colour == f2.colour || f1.colour == f3.colour || f2.colour == f3.colour) continue;
                out.push_back({static_cast<int>(i), static_cast<int>(j), {f1, f2, f3}});
            }
        std::shuffle(out.begin(), out.end(), rng);
        return out;
    };
    auto p1 = half_paths(state.rem_b, x);
    auto p2 = half_paths(y, state.rem_a);
    if (p1.empty() || p2.empty())
        throw SearchExhausted("stage i", std::string("no length-5 alternating path from ") +
                                             (p1.empty() ? "the B remainder to x" : "y to the A remainder") +
                                             " through m_id with usable rainbow colours");

    struct Combo {
        std::size_t a, b;
        std::vector<int> f2;  // rb indices
        std::uint64_t key;
    };
    std::vector<Combo> combos;
    for (std::size_t i = 0; i < p1.size() && combos.size() < opts.combos; ++i)
        for (std::size_t j = 0; j < p2.size() && combos.size() < opts.combos; ++j) {
            const auto& P = p1[i];
            const auto& Q = p2[j];
            if (P.i == Q.i || P.i == Q.j || P.j == Q.i || P.j == Q.j) continue;
            std::vector<int> cols;
            for (const auto* h : {&P, &Q})
                for (const Edge& e : h->f) cols.push_back(e.colour);
            if (sorted_unique(cols).size() != 6) continue;
            std::vector<int> f2;
            for (int c : cols) {
                const auto& bl = block[rb_by_colour[c]];
                f2.insert(f2.end(), bl.begin(), bl.end());
            }
            combos.push_back({i, j, sorted_unique(f2), rng()});
        }
    if (combos.empty()) throw SearchExhausted("stage i", "no vertex-disjoint rainbow pair of paths");
    // fewest block edges first: a smaller F2 means a smaller E3
    std::sort(combos.begin(), combos.end(), [](const Combo& a, const Combo& b) {
        return a.f2.size() != b.f2.size() ? a.f2.size() < b.f2.size() : a.key < b.key;
    });

    std::uint64_t tried = 0;
    for (const Combo& cb : combos) {
        ++tried;
        const auto& P = p1[cb.a];
        const auto& Q = p2[cb.b];
        std::vector<char> blocked(mid.size(), 0);
        for (int k : {P.i, P.j, Q.i, Q.j}) blocked[k] = 1;
        std::vector<int> f1_cols;
        for (const auto* h : {&P, &Q})
            for (const Edge& e : h->f) f1_cols.push_back(e.colour);
        std::vector<int> need;
        for (int r : cb.f2)
            if (!std::count(f1_cols.begin(), f1_cols.end(), mrb[r].colour)) need.push_back(mrb[r].colour);
        std::sort(need.begin(), need.end());
        F3Search search(g, mid, blocked, need, opts.budget, rng);
        if (!search.run()) continue;

        AdditionStep out;
        for (int k : {P.i, P.j, Q.i, Q.j}) out.e1.push_back(mid[k]);
        for (const auto* h : {&P, &Q}) out.f1.insert(out.f1.end(), h->f.begin(), h->f.end());
        std::vector<char> in_f2(mrb.size(), 0), in_block(mrb.size(), 0);
        for (int r : cb.f2) {
            in_f2[r] = 1;
            out.f2.push_back(mrb[r]);
            if (!in_block[r]) {
                for (int q : block[r]) in_block[q] = 1;
                out.e2.insert(out.e2.end(), block_c0[r].begin(), block_c0[r].end());
            }
        }
        std::vector<char> drop_id(mid.size(), 0);
        for (int k : {P.i, P.j, Q.i, Q.j}) drop_id[k] = 1;
        for (int k : search.e3) drop_id[k] = 1, out.e3.push_back(mid[k]);
        out.f3 = search.f3;

        AdditionState& nx = out.next;
        nx.c0 = c0;
        for (std::size_t k = 0; k < mid.size(); ++k)
            if (!drop_id[k]) nx.m_id.push_back(mid[k]);
        nx.m_id.insert(nx.m_id.end(), out.e2.begin(), out.e2.end());
        for (std::size_t r = 0; r < mrb.size(); ++r)
            if (!in_f2[r]) nx.m_rb.push_back(mrb[r]);
        nx.m_rb.insert(nx.m_rb.end(), out.f1.begin(), out.f1.end());
        nx.m_rb.insert(nx.m_rb.end(), out.f3.begin(), out.f3.end());
        nx.rem_a = search.w_;
        nx.rem_b = search.z_;
        for (auto* v : {&nx.m_id, &nx.m_rb, &out.e1, &out.f1, &out.e2, &out.f2, &out.e3, &out.f3})
            std::sort(v->begin(), v->end());

        // bookkeeping: one more c0 edge, same colours, vertex set grows by {x, y}
        auto fail = [](const std::string& m) { throw std::logic_error("addition_step: " + m); };
        if (nx.m_id.size() != mid.size() + 1) fail("m_id did not grow by exactly one edge");
        if (out.e2.size() != out.f2.size() || out.e3.size() != out.f3.size() + 1) fail("stage sizes do not balance");
        std::vector<int> before, after;
        for (const Edge& e : mrb) before.push_back(e.colour);
        for (const Edge& e : nx.m_rb) after.push_back(e.colour);
        std::sort(before.begin(), before.end());
        std::sort(after.begin(), after.end());
        if (before != after) fail("colour multiset of m_rb changed");
        if (auto p = addition_state_problem(g, nx); !p.empty()) fail("new state invalid: " + p);
        std::vector<int> vold, vnew;
        auto collect = [&](const AdditionState& s, std::vector<int>& v) {
            for (const auto* m : {&s.m_id, &s.m_rb})
                for (const Edge& e : *m) v.push_back(e.a), v.push_back(flat_b(g, e.b));
            v.push_back(s.rem_a);
            v.push_back(flat_b(g, s.rem_b));
            std::sort(v.begin(), v.end());
        };
        collect(state, vold);
        collect(nx, vnew);
        vold.push_back(x);
        vold.push_back(flat_b(g, y));
        std::sort(vold.begin(), vold.end());
        if (vold != vnew) fail("vertex set is not old + {x, y}");
        return out;
    }
    throw SearchExhausted("stage iii", "no exact alternating cover of the returned colours among " +
                                           std::to_string(tried) + " candidate F1/F2 choices");
}

Json to_json(const EdgeSwitcher& s) {
    Json j;
    j["vertices"] = s.vertices;
    j["colours"] = s.colours;
    j["targets"] = to_json(std::vector<Edge>{s.e, s.f});
    j["order"] = s.order();
    j["patched"] = s.patched;
    j["cover_e"] = to_json(s.cover_e);
    j["cover_f"] = to_json(s.cover_f);
    return j;
}

Json to_json(const Absorber& a) {
    Json j;
    j["vertices"] = a.vertices;
    j["colours"] = a.colours;
    j["targets"] = to_json(a.targets);
    j["order"] = a.order();
    Json covers = Json::array();
    for (const auto& m : a.covers) covers.push_back(to_json(m));
    j["covers"] = covers;
    return j;
}

Json to_json(const RobustTemplate& k) {
    Json j;
    j["h"] = k.h;
    j["x"] = k.h;
    j["y"] = k.y_size();
    j["z"] = k.z_size();
    j["edges"] = k.edge_count();
    j["max_degree"] = k.max_degree();
    j["attempts"] = k.attempts_used;
    j["subsets_checked"] = k.subsets_checked;
    j["adjacency"] = k.adj;
    return j;
}

Json to_json(const DistributiveAbsorber& d) {
    Json j;
    j["vertices"] = d.vertices;
    j["colours"] = d.colours;
    j["targets"] = to_json(d.targets);
    j["m0"] = d.m0;
    j["edges_y"] = to_json(d.edges_y);
    j["edges_z"] = to_json(d.edges_z);
    j["template"] = to_json(d.templ);
    Json parts = Json::array();
    for (const auto& p : d.parts) parts.push_back(to_json(p));
    j["parts"] = parts;
    return j;
}

Json to_json(const AdditionState& s) {
    Json j;
    j["c0"] = s.c0;
    j["m_id"] = to_json(s.m_id);
    j["m_rb"] = to_json(s.m_rb);
    j["remainder"] = {s.rem_a, s.rem_b};
    return j;
}

Json to_json(const AdditionStep& s) {
    Json j;
    j["state"] = to_json(s.next);
    const std::pair<const char*, const std::vector<Edge>*> parts[] = {{"E1", &s.e1}, {"F1", &s.f1}, {"E2", &s.e2},
                                                                       {"F2", &s.f2}, {"E3", &s.e3}, {"F3", &s.f3}};
    for (auto [name, v] : parts) j[name] = to_json(*v);
    return j;
}

AdditionState addition_state_from_json(const Json& j) {
    require(j.is_object() && j.contains("c0") && j.contains("m_id") && j.contains("m_rb") && j.contains("remainder"),
            "addition state JSON needs c0, m_id, m_rb and remainder");
    AdditionState s;
    s.c0 = j.at("c0").get<int>();
    s.m_id = edges_from_json(j.at("m_id"));
    s.m_rb = edges_from_json(j.at("m_rb"));
    const Json& r = j.at("remainder");
    require(r.is_array() && r.size() == 2, "remainder must be [a, b]");
    s.rem_a = r[0].get<int>();
    s.rem_b = r[1].get<int>();
    return s;
}

}  // namespace tvl
