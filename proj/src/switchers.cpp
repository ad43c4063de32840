#include "tvl/switchers.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <thread>
#include <unordered_map>

namespace tvl {

namespace {

std::vector<int> colours_of(const std::vector<Edge>& m) {
    std::vector<int> c;
    for (const Edge& e : m) c.push_back(e.colour);
    std::sort(c.begin(), c.end());
    return c;
}

// Structure only, no host graph.
std::string structure_problem(const ColourSwitcher& s) {
    const auto& m1 = s.m1.edges;
    const auto& m2 = s.m2.edges;
    if (m1.size() != m2.size()) return "matchings differ in size";
    if (s.switch_from == s.switch_to) return "switch colours must differ";
    for (const auto* m : {&m1, &m2}) {
        std::set<int> as, bs, cs;
        for (const Edge& e : *m)
            if (!as.insert(e.a).second || !bs.insert(e.b).second) return "not a matching";
            else if (!cs.insert(e.colour).second) return "not rainbow";
    }
    auto c1 = colours_of(m1), c2 = colours_of(m2);
    if (!std::binary_search(c1.begin(), c1.end(), s.switch_from)) return "switch_from not in m1";
    if (!std::binary_search(c2.begin(), c2.end(), s.switch_to)) return "switch_to not in m2";
    c1.erase(std::find(c1.begin(), c1.end(), s.switch_from));
    c2.erase(std::find(c2.begin(), c2.end(), s.switch_to));
    if (c1 != c2) return "colour sets differ by more than the switch";

    std::map<int, const Edge*> m1_at_a, m1_at_b, m2_at_a, m2_at_b;
    for (const Edge& e : m1) m1_at_a[e.a] = &e, m1_at_b[e.b] = &e;
    for (const Edge& e : m2) m2_at_a[e.a] = &e, m2_at_b[e.b] = &e;
    if (m1_at_a.size() != m2_at_a.size() || m1_at_b.size() != m2_at_b.size()) return "vertex sets differ";
    for (auto [a, e] : m1_at_a)
        if (!m2_at_a.count(a)) return "vertex sets differ";
    for (auto [b, e] : m1_at_b)
        if (!m2_at_b.count(b)) return "vertex sets differ";
    // a -m1- b -m2- a' -m1- b' -m2- a must close after four edges
    for (const Edge& e : m1) {
        const Edge* f = m2_at_b[e.b];
        if (f->a == e.a) return "m1 and m2 share an edge";
        const Edge* g = m1_at_a[f->a];
        const Edge* h = m2_at_b[g->b];
        if (h->a != e.a) return "union is not a union of 4-cycles";
        std::set<int> cs{e.colour, f->colour, g->colour, h->colour};
        if (cs.size() != 4) return "4-cycle is not rainbow";
    }
    return {};
}

}  // namespace

ColourSwitcher reversed(const ColourSwitcher& s) { return {s.m2, s.m1, s.switch_to, s.switch_from}; }

std::vector<int> shared_colours(const ColourSwitcher& s) {
    auto c1 = colours_of(s.m1.edges), c2 = colours_of(s.m2.edges);
    std::vector<int> out;
    std::set_intersection(c1.begin(), c1.end(), c2.begin(), c2.end(), std::back_inserter(out));
    return out;
}

std::vector<int> switcher_vertices(const ColouredBipartiteGraph& g, const ColourSwitcher& s) {
    std::vector<int> v;
    for (const Edge& e : s.m1.edges) v.push_back(flat_a(g, e.a)), v.push_back(flat_b(g, e.b));
    std::sort(v.begin(), v.end());
    return v;
}

std::string switcher_problem(const ColouredBipartiteGraph& g, const ColourSwitcher& s) {
    for (const auto* m : {&s.m1.edges, &s.m2.edges})
        for (const Edge& e : *m)
            if (!g.contains(e)) return "edge not in host graph";
    return structure_problem(s);
}

std::array<Edge, 2> RainbowCycle::matching(int which) const {
    if (which == 0) return {Edge{a1, b1, m0[0]}, Edge{a2, b2, m0[1]}};
    return {Edge{a1, b2, m1[0]}, Edge{a2, b1, m1[1]}};
}

int RainbowCycle::opposite(int c) const {
    if (m0[0] == c) return m0[1];
    if (m0[1] == c) return m0[0];
    if (m1[0] == c) return m1[1];
    if (m1[1] == c) return m1[0];
    return kEmpty;
}

std::vector<RainbowCycle> rainbow_4cycles(const ColouredBipartiteGraph& g) {
    std::vector<RainbowCycle> out;
    for (int a1 = 0; a1 < g.a_size(); ++a1)
        for (int a2 = a1 + 1; a2 < g.a_size(); ++a2) {
            // common neighbours, sorted
            std::vector<int> common;
            for (int b : g.a_neighbours(a1))
                if (g.has_edge(a2, b)) common.push_back(b);
            std::sort(common.begin(), common.end());
            for (std::size_t i = 0; i < common.size(); ++i)
                for (std::size_t j = i + 1; j < common.size(); ++j) {
                    int b1 = common[i], b2 = common[j];
                    RainbowCycle q{a1, a2, b1, b2, {g.colour_of(a1, b1), g.colour_of(a2, b2)},
                                   {g.colour_of(a1, b2), g.colour_of(a2, b1)}};
                    // proper colouring already separates adjacent edges
                    if (q.m0[0] != q.m0[1] && q.m1[0] != q.m1[1]) out.push_back(q);
                }
        }
    return out;
}

SwitcherIndex::SwitcherIndex(const ColouredBipartiteGraph& g) : g_(g), cycles_(rainbow_4cycles(g)) {
    by_colour_.assign(g.colour_bound(), {});
    entries_.reserve(cycles_.size() * 4);
    for (int i = 0; i < static_cast<int>(cycles_.size()); ++i) {
        auto cs = cycles_[i].colours();
        for (int k = 0; k < 4; ++k) {
            by_colour_[cs[k]].push_back(i);
            std::array<int, 3> t;
            for (int j = 0, p = 0; j < 4; ++j)
                if (j != k) t[p++] = cs[j];
            entries_.push_back({triple_key(t[0], t[1], t[2]), i, cs[k]});
        }
    }
    std::sort(entries_.begin(), entries_.end());
    for (std::size_t i = 0; i < entries_.size(); ++i)
        if (i == 0 || entries_[i].key != entries_[i - 1].key) starts_.push_back(i);
    starts_.push_back(entries_.size());
}

std::uint64_t SwitcherIndex::triple_key(int x, int y, int z) const {
    std::array<int, 3> t{x, y, z};
    std::sort(t.begin(), t.end());
    const std::uint64_t B = static_cast<std::uint64_t>(g_.colour_bound());
    return (static_cast<std::uint64_t>(t[0]) * B + t[1]) * B + t[2];
}

std::pair<std::size_t, std::size_t> SwitcherIndex::bucket(std::uint64_t key) const {
    auto lo = std::lower_bound(entries_.begin(), entries_.end(), key,
                               [](const Entry& e, std::uint64_t k) { return e.key < k; });
    auto hi = std::upper_bound(lo, entries_.end(), key, [](std::uint64_t k, const Entry& e) { return k < e.key; });
    return {static_cast<std::size_t>(lo - entries_.begin()), static_cast<std::size_t>(hi - entries_.begin())};
}

ColourSwitcher make_switcher(const RainbowCycle& q1, int side1, const RainbowCycle& q2, int side2, int from, int to) {
    ColourSwitcher s;
    for (const Edge& e : q1.matching(side1)) s.m1.edges.push_back(e);
    for (const Edge& e : q2.matching(side2)) s.m1.edges.push_back(e);
    for (const Edge& e : q1.matching(1 - side1)) s.m2.edges.push_back(e);
    for (const Edge& e : q2.matching(1 - side2)) s.m2.edges.push_back(e);
    std::sort(s.m1.edges.begin(), s.m1.edges.end());
    std::sort(s.m2.edges.begin(), s.m2.edges.end());
    s.switch_from = from;
    s.switch_to = to;
    return s;
}

void SwitcherIndex::visit_bucket(std::size_t lo, std::size_t hi, const Visitor& fn) const {
    for (std::size_t i = lo; i < hi; ++i)
        for (std::size_t j = i + 1; j < hi; ++j) {
            const Entry& ei = entries_[i];
            const Entry& ej = entries_[j];
            const RainbowCycle& q1 = cycles_[ei.cycle];
            const RainbowCycle& q2 = cycles_[ej.cycle];
            if (!q1.disjoint(q2)) continue;
            const int x = ei.excluded, y = ej.excluded;
            if (x != y) {
                if (q1.opposite(x) != q2.opposite(y)) continue;
                fn(q1, q1.side_of(x), q2, 1 - q2.side_of(y), x, y, false);
                fn(q1, 1 - q1.side_of(x), q2, q2.side_of(y), y, x, false);
                continue;
            }
            // same four colours: seen in four buckets, handle once
            auto cs = q1.colours();
            if (x != *std::min_element(cs.begin(), cs.end())) continue;
            if (q2.opposite(q1.m0[0]) != q1.m0[1]) continue;
            int s = q2.side_of(q1.m1[0]);
            fn(q1, 0, q2, s, -1, -1, true);
            fn(q1, 1, q2, 1 - s, -1, -1, true);
        }
}

void SwitcherIndex::for_each_part(const Visitor& fn, int part, int parts) const {
    for (std::size_t k = static_cast<std::size_t>(part); k + 1 < starts_.size(); k += static_cast<std::size_t>(parts))
        visit_bucket(starts_[k], starts_[k + 1], fn);
}

std::vector<ColourSwitcher> SwitcherIndex::between(int c, int d) const {
    std::vector<ColourSwitcher> out;
    if (c == d || c < 0 || d < 0 || c >= g_.colour_bound() || d >= g_.colour_bound()) return out;
    for (int i : by_colour_[c]) {
        const RainbowCycle& q1 = cycles_[i];
        if (q1.has_colour(d)) continue;
        std::array<int, 3> t;
        auto cs = q1.colours();
        for (int j = 0, p = 0; j < 4; ++j)
            if (cs[j] != c) t[p++] = cs[j];
        auto [lo, hi] = bucket(triple_key(t[0], t[1], t[2]));
        for (std::size_t k = lo; k < hi; ++k) {
            if (entries_[k].excluded != d) continue;
            const RainbowCycle& q2 = cycles_[entries_[k].cycle];
            if (!q1.disjoint(q2) || q1.opposite(c) != q2.opposite(d)) continue;
            out.push_back(make_switcher(q1, q1.side_of(c), q2, 1 - q2.side_of(d), c, d));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::uint64_t SwitcherIndex::count_between(int c, int d) const { return between(c, d).size(); }

std::vector<ColourSwitcher> enumerate_switchers4(const ColouredBipartiteGraph& g, int c, int d) {
    if (c == d) return {};
    return SwitcherIndex(g).between(c, d);
}

std::uint64_t SwitcherWeights::total() const {
    std::uint64_t t = 0;
    for (int c = 0; c < colour_bound; ++c)
        for (int d = c + 1; d < colour_bound; ++d) t += at(c, d);
    return t;
}

bool SwitcherWeights::symmetric() const {
    for (int c = 0; c < colour_bound; ++c)
        for (int d = c + 1; d < colour_bound; ++d)
            if (at(c, d) != at(d, c)) return false;
    return true;
}

std::vector<std::array<std::uint64_t, 3>> SwitcherWeights::nonzero() const {
    std::vector<std::array<std::uint64_t, 3>> out;
    for (int c = 0; c < colour_bound; ++c)
        for (int d = c + 1; d < colour_bound; ++d)
            if (at(c, d) > 0)
                out.push_back({static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(d), at(c, d)});
    return out;
}

SwitcherWeights weight_matrix(const ColouredBipartiteGraph& g, int threads) {
    SwitcherIndex idx(g);
    const int B = g.colour_bound();
    threads = std::max(1, threads);
    std::vector<std::vector<std::uint64_t>> local(threads, std::vector<std::uint64_t>(static_cast<std::size_t>(B) * B));
    std::vector<std::uint64_t> nulls(threads, 0);
    auto work = [&](int t) {
        idx.for_each_part(
            [&](const RainbowCycle&, int, const RainbowCycle&, int, int from, int to, bool null) {
                if (null)
                    ++nulls[t];
                else
                    ++local[t][static_cast<std::size_t>(from) * B + to];
            },
            t, threads);
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
    }
    SwitcherWeights w;
    w.colour_bound = B;
    w.ordered.assign(static_cast<std::size_t>(B) * B, 0);
    for (int t = 0; t < threads; ++t) {
        for (std::size_t k = 0; k < w.ordered.size(); ++k) w.ordered[k] += local[t][k];
        w.null_switchers += nulls[t];
    }
    return w;
}

BoundReport check_count_bounds(const ColouredBipartiteGraph& g) {
    BoundReport rep;
    const int n = g.vertex_count();
    rep.n = n;
    const double n3 = static_cast<double>(n) * n * n;
    rep.bound = {20 * n3, 50 * n3, 1000.0 * n, 600.0 * n, 100 * n3};
    const std::size_t B = static_cast<std::size_t>(std::max(1, g.colour_bound()));
    const std::size_t E = static_cast<std::size_t>(g.a_size()) * g.b_size();
    std::vector<std::uint64_t> k1(B * B, 0), k2(B * n, 0), k5(std::max<std::size_t>(E, 1), 0);
    std::unordered_map<std::uint64_t, std::uint64_t> k3, k4;
    auto eid = [&](const Edge& e) { return static_cast<std::uint64_t>(e.a) * g.b_size() + e.b; };

    SwitcherIndex idx(g);
    idx.for_each([&](const RainbowCycle& q1, int s1, const RainbowCycle& q2, int s2, int from, int to, bool null) {
        if (null)
            ++rep.null_switchers;
        else
            ++rep.switchers;
        ColourSwitcher s = make_switcher(q1, s1, q2, s2, from, to);
        std::vector<Edge> all = s.m1.edges;
        all.insert(all.end(), s.m2.edges.begin(), s.m2.edges.end());
        std::vector<int> verts = switcher_vertices(g, s);
        auto shared = shared_colours(s);
        std::vector<int> union_colours = colours_of(all);
        union_colours.erase(std::unique(union_colours.begin(), union_colours.end()), union_colours.end());

        // i) and ii): keyed by the colour switched out
        std::vector<int> froms = null ? shared : std::vector<int>{from};
        for (int c : froms) {
            for (int c2 : shared)
                if (c2 != c) ++k1[c * B + c2];
            for (int v : verts) ++k2[static_cast<std::size_t>(c) * n + v];
        }
        // iii) and iv): same-colour edge pairs in the union
        for (std::size_t i = 0; i < all.size(); ++i)
            for (std::size_t j = i + 1; j < all.size(); ++j) {
                if (all[i].colour != all[j].colour) continue;
                std::uint64_t e = eid(all[i]), f = eid(all[j]);
                if (e > f) std::swap(e, f);
                const std::uint64_t pair = e * E + f;
                for (int c2 : union_colours)
                    if (c2 != all[i].colour) ++k3[pair * B + c2];
                for (int v : verts) {
                    int ea = flat_a(g, all[i].a), eb = flat_b(g, all[i].b), fa = flat_a(g, all[j].a),
                        fb = flat_b(g, all[j].b);
                    if (v != ea && v != eb && v != fa && v != fb) ++k4[pair * n + v];
                }
            }
        // v)
        for (const Edge& e : all) ++k5[eid(e)];
    });

    auto note = [&](int which, std::uint64_t count) {
        rep.max_count[which] = std::max(rep.max_count[which], count);
        if (static_cast<double>(count) > rep.bound[which]) ++rep.violations[which];
    };
    for (auto x : k1) note(0, x);
    for (auto x : k2) note(1, x);
    for (auto& [k, x] : k3) note(2, x);
    for (auto& [k, x] : k4) note(3, x);
    for (auto x : k5) note(4, x);
    for (int i = 0; i < 5; ++i) rep.max_ratio[i] = n > 0 ? static_cast<double>(rep.max_count[i]) / rep.bound[i] : 0.0;
    return rep;
}

ColourSwitcher compose_switchers(const ColourSwitcher& s_ab, const ColourSwitcher& s_bc) {
    for (const ColourSwitcher* s : {&s_ab, &s_bc}) {
        auto p = structure_problem(*s);
        require(p.empty(), "compose_switchers: invalid input switcher: " + p);
    }
    require(s_ab.switch_to == s_bc.switch_from, "compose_switchers: pivot colours do not match");
    require(s_ab.switch_from != s_bc.switch_to, "compose_switchers: composite would switch a colour to itself");
    std::set<int> as, bs;
    for (const Edge& e : s_ab.m1.edges) as.insert(e.a), bs.insert(e.b);
    for (const Edge& e : s_bc.m1.edges) {
        require(!as.count(e.a), "compose_switchers: shared A-vertex " + std::to_string(e.a));
        require(!bs.count(e.b), "compose_switchers: shared B-vertex " + std::to_string(e.b));
    }
    auto all_colours = [](const ColourSwitcher& s) {
        std::set<int> c;
        for (const Edge& e : s.m1.edges) c.insert(e.colour);
        for (const Edge& e : s.m2.edges) c.insert(e.colour);
        return c;
    };
    auto c1 = all_colours(s_ab), c2 = all_colours(s_bc);
    for (int c : c2)
        require(c == s_ab.switch_to || !c1.count(c), "compose_switchers: shared colour " + std::to_string(c));
    ColourSwitcher out;
    out.m1.edges = s_ab.m1.edges;
    out.m1.edges.insert(out.m1.edges.end(), s_bc.m1.edges.begin(), s_bc.m1.edges.end());
    out.m2.edges = s_ab.m2.edges;
    out.m2.edges.insert(out.m2.edges.end(), s_bc.m2.edges.begin(), s_bc.m2.edges.end());
    std::sort(out.m1.edges.begin(), out.m1.edges.end());
    std::sort(out.m2.edges.begin(), out.m2.edges.end());
    out.switch_from = s_ab.switch_from;
    out.switch_to = s_bc.switch_to;
    return out;
}

RainbowMatching apply_switcher(const RainbowMatching& m, const ColourSwitcher& s) {
    std::set<Edge> have(m.edges.begin(), m.edges.end());
    for (const Edge& e : s.m1.edges) require(have.count(e) == 1, "apply_switcher: switcher edge not in matching");
    for (const Edge& e : m.edges)
        require(e.colour != s.switch_to, "apply_switcher: colour " + std::to_string(s.switch_to) + " already used");
    for (const Edge& e : s.m1.edges) have.erase(e);
    RainbowMatching out{std::vector<Edge>(have.begin(), have.end())};
    out.edges.insert(out.edges.end(), s.m2.edges.begin(), s.m2.edges.end());
    std::sort(out.edges.begin(), out.edges.end());
    return out;
}

bool find_chain_switcher(const SwitcherIndex& idx, const std::vector<int>& path, const std::vector<char>& banned_vertex,
                         const std::vector<char>& banned_colour, ColourSwitcher& out, std::uint64_t budget) {
    require(path.size() >= 2, "find_chain_switcher: path needs two colours");
    const auto& g = idx.graph();
    const int steps = static_cast<int>(path.size()) - 1;
    std::vector<std::vector<ColourSwitcher>> options(steps);
    for (int i = 0; i < steps; ++i) {
        options[i] = idx.between(path[i], path[i + 1]);
        if (options[i].empty()) return false;
    }
    std::vector<char> used_v(banned_vertex), used_c(banned_colour);
    used_v.resize(g.vertex_count(), 0);
    used_c.resize(g.colour_bound(), 0);
    for (int c : path) {
        if (c < 0 || c >= g.colour_bound() || used_c[c]) return false;
        used_c[c] = 1;
    }
    std::vector<const ColourSwitcher*> chosen(steps);
    std::uint64_t nodes = 0;
    auto dfs = [&](auto&& self, int i) -> bool {
        if (i == steps) return true;
        for (const ColourSwitcher& s : options[i]) {
            if (budget && ++nodes > budget) return false;
            auto verts = switcher_vertices(g, s);
            auto shared = shared_colours(s);
            bool ok = true;
            for (int v : verts) ok = ok && !used_v[v];
            for (int c : shared) ok = ok && !used_c[c];
            if (!ok) continue;
            for (int v : verts) used_v[v] = 1;
            for (int c : shared) used_c[c] = 1;
            chosen[i] = &s;
            if (self(self, i + 1)) return true;
            for (int v : verts) used_v[v] = 0;
            for (int c : shared) used_c[c] = 0;
        }
        return false;
    };
    if (!dfs(dfs, 0)) return false;
    out = *chosen[0];
    for (int i = 1; i < steps; ++i) out = compose_switchers(out, *chosen[i]);
    return true;
}

}  // namespace tvl
