#include "tvl/expander.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <random>

#include "tvl/errors.hpp"

namespace tvl {

SimpleGraph::SimpleGraph(int n, const std::vector<std::pair<int, int>>& edges) {
    require(n >= 0, "SimpleGraph: negative vertex count");
    adj_.assign(n, {});
    labels_.resize(n);
    std::iota(labels_.begin(), labels_.end(), 0);
    for (auto [u, v] : edges) {
        require(u >= 0 && v >= 0 && u < n && v < n, "SimpleGraph: vertex out of range");
        require(u != v, "SimpleGraph: loop");
        adj_[u].push_back(v);
        adj_[v].push_back(u);
    }
    for (auto& a : adj_) {
        std::sort(a.begin(), a.end());
        require(std::adjacent_find(a.begin(), a.end()) == a.end(), "SimpleGraph: multi-edge");
    }
    edges_ = edges.size();
}

bool SimpleGraph::adjacent(int u, int v) const { return std::binary_search(adj_[u].begin(), adj_[u].end(), v); }

double SimpleGraph::average_degree() const {
    return adj_.empty() ? 0.0 : 2.0 * static_cast<double>(edges_) / static_cast<double>(adj_.size());
}

int SimpleGraph::min_degree() const {
    int m = 0;
    for (std::size_t v = 0; v < adj_.size(); ++v) m = v == 0 ? degree(0) : std::min(m, degree(static_cast<int>(v)));
    return m;
}

int SimpleGraph::max_degree() const {
    int m = 0;
    for (const auto& a : adj_) m = std::max(m, static_cast<int>(a.size()));
    return m;
}

std::vector<std::pair<int, int>> SimpleGraph::edge_list() const {
    std::vector<std::pair<int, int>> e;
    for (int u = 0; u < vertex_count(); ++u)
        for (int v : adj_[u])
            if (u < v) e.push_back({u, v});
    return e;
}

SimpleGraph SimpleGraph::induced(const std::vector<int>& keep) const {
    std::vector<int> pos(vertex_count(), -1);
    for (std::size_t i = 0; i < keep.size(); ++i) pos[keep[i]] = static_cast<int>(i);
    std::vector<std::pair<int, int>> e;
    for (std::size_t i = 0; i < keep.size(); ++i)
        for (int v : adj_[keep[i]])
            if (pos[v] > static_cast<int>(i)) e.push_back({static_cast<int>(i), pos[v]});
    SimpleGraph h(static_cast<int>(keep.size()), e);
    for (std::size_t i = 0; i < keep.size(); ++i) h.labels_[i] = labels_[keep[i]];
    return h;
}

SimpleGraph SimpleGraph::without(const std::vector<int>& drop) const {
    std::vector<char> gone(vertex_count(), 0);
    for (int v : drop) gone[v] = 1;
    std::vector<int> keep;
    for (int v = 0; v < vertex_count(); ++v)
        if (!gone[v]) keep.push_back(v);
    return induced(keep);
}

SimpleGraph SimpleGraph::complete(int n) {
    std::vector<std::pair<int, int>> e;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) e.push_back({u, v});
    return SimpleGraph(n, e);
}

SimpleGraph SimpleGraph::cycle(int n) {
    std::vector<std::pair<int, int>> e;
    for (int u = 0; u < n; ++u) e.push_back({u, (u + 1) % n});
    return SimpleGraph(n, e);
}

SimpleGraph SimpleGraph::path(int n) {
    std::vector<std::pair<int, int>> e;
    for (int u = 0; u + 1 < n; ++u) e.push_back({u, u + 1});
    return SimpleGraph(n, e);
}

SimpleGraph SimpleGraph::hypercube(int dim) {
    const int n = 1 << dim;
    std::vector<std::pair<int, int>> e;
    for (int u = 0; u < n; ++u)
        for (int b = 0; b < dim; ++b)
            if (!(u >> b & 1)) e.push_back({u, u | 1 << b});
    return SimpleGraph(n, e);
}

SimpleGraph SimpleGraph::erdos_renyi(int n, double p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(p);
    std::vector<std::pair<int, int>> e;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (coin(rng)) e.push_back({u, v});
    return SimpleGraph(n, e);
}

SimpleGraph SimpleGraph::barbell(int k) {
    std::vector<std::pair<int, int>> e;
    for (int side = 0; side < 2; ++side)
        for (int u = 0; u < k; ++u)
            for (int v = u + 1; v < k; ++v) e.push_back({side * k + u, side * k + v});
    e.push_back({k - 1, k});
    return SimpleGraph(2 * k, e);
}

double default_alpha(int n) { return n <= 2 ? 1.0 : 1.0 / (16.0 * std::log(static_cast<double>(n))); }

std::string to_string(SearchMode m) { return m == SearchMode::Exact ? "exact" : "heuristic"; }

std::string to_string(ProcessStep::Kind k) {
    switch (k) {
        case ProcessStep::MinDegreeDeletion: return "min_degree_deletion";
        case ProcessStep::SparseSplit: return "sparse_split";
        case ProcessStep::DenseSplit: return "dense_split";
        case ProcessStep::Stop: return "stop";
    }
    return "?";
}

namespace {

int kill_budget(double delta_cap) { return static_cast<int>(std::floor(delta_cap + 1e-9)); }

// Max number of candidates that can be killed when candidate i uses one unit
// of capacity at each of its U-neighbours (cand_u[i]) and capacity is cap.
int max_kills(const std::vector<std::vector<int>>& cand_u, int u_count, int cap, bool exact,
              std::vector<int>* chosen) {
    const int m = static_cast<int>(cand_u.size());
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return cand_u[x].size() < cand_u[y].size(); });
    std::vector<int> load(u_count, 0);
    auto fits = [&](int i) {
        for (int u : cand_u[i])
            if (load[u] >= cap) return false;
        return true;
    };
    auto put = [&](int i, int dlt) {
        for (int u : cand_u[i]) load[u] += dlt;
    };
    std::vector<int> cur, best;
    if (!exact) {
        for (int i : order)
            if (fits(i)) put(i, 1), best.push_back(i);
    } else {
        // greedy first gives a good incumbent
        for (int i : order)
            if (fits(i)) put(i, 1), best.push_back(i);
        for (int i : best) put(i, -1);
        auto dfs = [&](auto&& self, int k) -> void {
            if (cur.size() + static_cast<std::size_t>(m - k) <= best.size()) return;
            if (k == m) {
                best = cur;
                return;
            }
            int i = order[k];
            if (fits(i)) {
                put(i, 1);
                cur.push_back(i);
                self(self, k + 1);
                cur.pop_back();
                put(i, -1);
            }
            self(self, k + 1);
        };
        dfs(dfs, 0);
    }
    if (chosen) *chosen = best;
    return static_cast<int>(best.size());
}

// Mask version for graphs with at most 14 vertices.
struct MaskGraph {
    int n;
    std::vector<std::uint32_t> adj;
    explicit MaskGraph(const SimpleGraph& g) : n(g.vertex_count()), adj(n, 0) {
        for (int v = 0; v < n; ++v)
            for (int w : g.neighbours(v)) adj[v] |= 1u << w;
    }
    std::uint32_t boundary(std::uint32_t u) const {
        std::uint32_t nb = 0;
        for (std::uint32_t s = u; s; s &= s - 1) nb |= adj[__builtin_ctz(s)];
        return nb & ~u;
    }
    // Surviving neighbourhood size under the best adversary.
    int adversarial(std::uint32_t u, int cap, std::uint32_t* killed_out = nullptr) const {
        std::uint32_t nb = boundary(u);
        int size = __builtin_popcount(nb);
        if (cap <= 0 || nb == 0) {
            if (killed_out) *killed_out = 0;
            return size;
        }
        std::vector<int> upos(n, -1);
        int uc = 0;
        for (std::uint32_t s = u; s; s &= s - 1) upos[__builtin_ctz(s)] = uc++;
        std::vector<std::vector<int>> cand;
        std::vector<int> who;
        for (std::uint32_t s = nb; s; s &= s - 1) {
            int v = __builtin_ctz(s);
            std::uint32_t into = adj[v] & u;
            if (__builtin_popcount(into) > cap) continue;
            std::vector<int> us;
            for (std::uint32_t t = into; t; t &= t - 1) us.push_back(upos[__builtin_ctz(t)]);
            cand.push_back(std::move(us));
            who.push_back(v);
        }
        std::vector<int> chosen;
        int k = max_kills(cand, uc, cap, true, &chosen);
        if (killed_out) {
            *killed_out = 0;
            for (int i : chosen) *killed_out |= 1u << who[i];
        }
        return size - k;
    }
};

std::vector<int> bits(std::uint32_t m) {
    std::vector<int> v;
    for (; m; m &= m - 1) v.push_back(__builtin_ctz(m));
    return v;
}

struct Violation {
    std::vector<int> u, killed, nb;
};

std::optional<Violation> exact_violation(const SimpleGraph& g, double alpha, double delta_cap, std::uint64_t* checked) {
    const int n = g.vertex_count();
    MaskGraph mg(g);
    const int cap = kill_budget(delta_cap);
    const int max_u = (2 * n) / 3;
    for (std::uint32_t u = 1; u < (1u << n); ++u) {
        int sz = __builtin_popcount(u);
        if (sz > max_u) continue;
        if (checked) ++*checked;
        std::uint32_t killed = 0;
        int left = mg.adversarial(u, cap, &killed);
        if (left < alpha * sz) {
            Violation v{bits(u), bits(killed), bits(mg.boundary(u) & ~killed)};
            return v;
        }
    }
    return std::nullopt;
}

// Greedy growth from each start vertex plus random subsets; greedy adversary.
std::optional<Violation> heuristic_violation(const SimpleGraph& g, double alpha, double delta_cap, std::uint64_t seed,
                                             int samples, std::uint64_t* checked) {
    const int n = g.vertex_count();
    const int max_u = (2 * n) / 3;
    if (max_u < 1) return std::nullopt;
    auto test = [&](const std::vector<int>& u) -> std::optional<Violation> {
        if (checked) ++*checked;
        std::vector<int> killed;
        auto nb = adversarial_neighbourhood(g, u, delta_cap, &killed, false);
        if (static_cast<double>(nb.size()) < alpha * static_cast<double>(u.size())) {
            std::vector<int> us = u;
            std::sort(us.begin(), us.end());
            return Violation{us, killed, nb};
        }
        return std::nullopt;
    };
    std::vector<int> in_u(n, 0), into(n, 0);
    for (int s = 0; s < n; ++s) {
        std::fill(in_u.begin(), in_u.end(), 0);
        std::fill(into.begin(), into.end(), 0);
        std::vector<int> u;
        int cur = s;
        while (true) {
            u.push_back(cur);
            in_u[cur] = 1;
            for (int w : g.neighbours(cur)) ++into[w];
            if (auto v = test(u)) return v;
            if (static_cast<int>(u.size()) >= max_u) break;
            int next = -1;
            for (int w = 0; w < n; ++w)
                if (!in_u[w] && into[w] > 0 && (next < 0 || into[w] > into[next])) next = w;
            if (next < 0) break;
            cur = next;
        }
    }
    std::mt19937_64 rng(seed);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (int t = 0; t < samples; ++t) {
        std::shuffle(perm.begin(), perm.end(), rng);
        int sz = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_u));
        if (auto v = test(std::vector<int>(perm.begin(), perm.begin() + sz))) return v;
    }
    return std::nullopt;
}

}  // namespace

std::vector<int> adversarial_neighbourhood(const SimpleGraph& g, const std::vector<int>& u, double delta_cap,
                                           std::vector<int>* killed, bool exact) {
    const int n = g.vertex_count();
    std::vector<int> pos(n, -1), into(n, 0);
    for (std::size_t i = 0; i < u.size(); ++i) pos[u[i]] = static_cast<int>(i);
    std::vector<int> nb;
    for (int x : u)
        for (int w : g.neighbours(x))
            if (pos[w] < 0 && into[w]++ == 0) nb.push_back(w);
    std::sort(nb.begin(), nb.end());
    const int cap = kill_budget(delta_cap);
    std::vector<std::vector<int>> cand;
    std::vector<int> who;
    if (cap > 0)
        for (int v : nb) {
            if (into[v] > cap) continue;
            std::vector<int> us;
            for (int w : g.neighbours(v))
                if (pos[w] >= 0) us.push_back(pos[w]);
            cand.push_back(std::move(us));
            who.push_back(v);
        }
    std::vector<int> chosen;
    max_kills(cand, static_cast<int>(u.size()), cap, exact, &chosen);
    std::vector<char> dead(n, 0);
    std::vector<int> k;
    for (int i : chosen) dead[who[i]] = 1, k.push_back(who[i]);
    std::sort(k.begin(), k.end());
    if (killed) *killed = k;
    std::vector<int> left;
    for (int v : nb)
        if (!dead[v]) left.push_back(v);
    return left;
}

VerificationReport verify_expansion(const SimpleGraph& h, const ExpanderParams& params, SearchMode mode,
                                    std::uint64_t seed, int samples) {
    require(params.alpha > 0, "verify_expansion: alpha must be positive");
    VerificationReport rep;
    rep.mode = mode;
    std::optional<Violation> v;
    if (mode == SearchMode::Exact) {
        require(h.vertex_count() <= kExactExpansionCap,
                "verify_expansion: exact mode needs at most " + std::to_string(kExactExpansionCap) + " vertices");
        v = exact_violation(h, params.alpha, params.delta_cap, &rep.subsets_checked);
    } else {
        v = heuristic_violation(h, params.alpha, params.delta_cap, seed, samples, &rep.subsets_checked);
    }
    if (v) {
        rep.passed = false;
        rep.witness_u = v->u;
        rep.killed = v->killed;
        rep.neighbourhood = v->nb;
    }
    return rep;
}

ExtractResult extract_expander(const SimpleGraph& g, double alpha_override, std::uint64_t seed) {
    require(g.vertex_count() > 0, "extract_expander: empty graph");
    const double alpha = alpha_override > 0 ? alpha_override : default_alpha(g.vertex_count());
    ExtractResult res;
    SimpleGraph cur = g;
    while (true) {
        ProcessStep st;
        st.n_before = cur.vertex_count();
        st.d_before = cur.average_degree();
        st.min_degree_before = cur.min_degree();
        const double d = st.d_before;
        if (st.min_degree_before < d / 2) {
            int v = 0;
            for (int w = 1; w < cur.vertex_count(); ++w)
                if (cur.degree(w) < cur.degree(v)) v = w;
            cur = cur.without({v});
            st.kind = ProcessStep::MinDegreeDeletion;
        } else {
            const bool exact = cur.vertex_count() <= kExactExpansionCap;
            st.mode = exact ? SearchMode::Exact : SearchMode::Heuristic;
            auto viol = exact ? exact_violation(cur, alpha, alpha * d, nullptr)
                              : heuristic_violation(cur, alpha, alpha * d, seed, 200, nullptr);
            if (!viol) {
                st.kind = ProcessStep::Stop;
                st.n_after = st.n_before;
                st.d_after = d;
                res.stop_mode = st.mode;
                res.trace.push_back(st);
                break;
            }
            st.u_size = static_cast<int>(viol->u.size());
            st.n_size = static_cast<int>(viol->nb.size());
            SimpleGraph rest = cur.without(viol->u);
            if (rest.average_degree() >= d) {
                cur = std::move(rest);
                st.kind = ProcessStep::SparseSplit;
            } else {
                std::vector<int> keep = viol->u;
                keep.insert(keep.end(), viol->nb.begin(), viol->nb.end());
                std::sort(keep.begin(), keep.end());
                cur = cur.induced(keep);
                st.kind = ProcessStep::DenseSplit;
            }
        }
        st.n_after = cur.vertex_count();
        st.d_after = cur.average_degree();
        res.trace.push_back(st);
    }
    res.h = std::move(cur);
    res.params = {alpha, alpha * res.h.average_degree()};
    return res;
}

PathsResult disjoint_short_paths(const SimpleGraph& h, int x, int y, int r, int max_len,
                                 const std::set<int>& forbidden_vertices,
                                 const std::set<std::pair<int, int>>& forbidden_edges) {
    require(x != y, "disjoint_short_paths: x == y");
    require(!forbidden_vertices.count(x) && !forbidden_vertices.count(y),
            "disjoint_short_paths: endpoint is forbidden");
    const int n = h.vertex_count();
    std::vector<char> blocked(n, 0);
    for (int v : forbidden_vertices) blocked[v] = 1;
    auto edge_ok = [&](int u, int v) {
        return !forbidden_edges.count({u, v}) && !forbidden_edges.count({v, u});
    };
    bool direct_used = false;
    PathsResult res;
    while (static_cast<int>(res.paths.size()) < r) {
        std::vector<int> parent(n, -2), dist(n, -1);
        std::queue<int> q;
        q.push(x);
        dist[x] = 0;
        parent[x] = -1;
        bool found = false;
        while (!q.empty() && !found) {
            int u = q.front();
            q.pop();
            if (dist[u] >= max_len) continue;
            for (int v : h.neighbours(u)) {
                if (!edge_ok(u, v)) continue;
                if (v == y) {
                    if (u == x && direct_used) continue;
                    parent[y] = u;
                    dist[y] = dist[u] + 1;
                    found = true;
                    break;
                }
                if (blocked[v] || dist[v] >= 0) continue;
                dist[v] = dist[u] + 1;
                parent[v] = u;
                q.push(v);
            }
        }
        if (!found) {
            res.exhausted = true;
            break;
        }
        std::vector<int> p;
        for (int v = y; v != -1; v = parent[v]) p.push_back(v);
        std::reverse(p.begin(), p.end());
        if (p.size() == 2) direct_used = true;
        for (std::size_t i = 1; i + 1 < p.size(); ++i) blocked[p[i]] = 1;
        res.paths.push_back(std::move(p));
    }
    return res;
}

C4Report count_labelled_c4(const SimpleGraph& g) {
    const int n = g.vertex_count();
    C4Report rep;
    std::vector<std::uint64_t> codeg(n);
    for (int w = 0; w < n; ++w) {
        std::fill(codeg.begin(), codeg.end(), 0);
        for (int x : g.neighbours(w))
            for (int y : g.neighbours(x)) ++codeg[y];
        for (int y = 0; y < n; ++y) {
            rep.closed_walks += codeg[y] * codeg[y];
            if (y != w && codeg[y] > 1) rep.labelled += codeg[y] * (codeg[y] - 1);
        }
    }
    const double e = static_cast<double>(g.edge_count()), nn = n;
    rep.lower_bound = n == 0 ? 0.0 : 16.0 * std::pow(e, 4) / std::pow(nn, 4) - 6.0 * nn * nn * nn;
    return rep;
}

}  // namespace tvl
