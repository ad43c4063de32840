#include "tvl/solvers.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <queue>
#include <random>
#include <thread>

namespace tvl {

int max_bipartite_matching(const ColouredBipartiteGraph& g) {
    const int na = g.a_size(), nb = g.b_size();
    std::vector<int> match_a(na, -1), match_b(nb, -1), dist(na);
    auto bfs = [&]() {
        std::queue<int> q;
        bool found = false;
        for (int a = 0; a < na; ++a) {
            if (match_a[a] == -1) {
                dist[a] = 0;
                q.push(a);
            } else {
                dist[a] = -1;
            }
        }
        while (!q.empty()) {
            int a = q.front();
            q.pop();
            for (int b : g.a_neighbours(a)) {
                int a2 = match_b[b];
                if (a2 == -1) {
                    found = true;
                } else if (dist[a2] == -1) {
                    dist[a2] = dist[a] + 1;
                    q.push(a2);
                }
            }
        }
        return found;
    };
    std::function<bool(int)> dfs = [&](int a) {
        for (int b : g.a_neighbours(a)) {
            int a2 = match_b[b];
            if (a2 == -1 || (dist[a2] == dist[a] + 1 && dfs(a2))) {
                match_a[a] = b;
                match_b[b] = a;
                return true;
            }
        }
        dist[a] = -1;
        return false;
    };
    int size = 0;
    while (bfs())
        for (int a = 0; a < na; ++a)
            if (match_a[a] == -1 && dfs(a)) ++size;
    return size;
}

namespace {

struct Shared {
    std::atomic<int> best{0};
    std::atomic<std::uint64_t> nodes{0};
    std::atomic<bool> aborted{false};
    std::atomic<bool> closed{false};  // incumbent met the root bound
    int root_ub = 0;
    std::mutex mu;
    std::vector<Edge> witness;
    std::uint64_t budget = 0;
};

class BranchAndBound {
public:
    BranchAndBound(const ColouredBipartiteGraph& g, Shared& sh)
        : g_(g), sh_(sh), used_b_(g.b_size(), 0), used_c_(g.colour_bound(), 0), done_a_(g.a_size(), 0) {}

    void take(const Edge& e) {
        used_b_[e.b] = 1;
        used_c_[e.colour] = 1;
        done_a_[e.a] = 1;
        cur_.push_back(e);
    }
    void untake(const Edge& e) {
        used_b_[e.b] = 0;
        used_c_[e.colour] = 0;
        done_a_[e.a] = 0;
        cur_.pop_back();
    }
    void skip(int a) { done_a_[a] = 1; }
    void unskip(int a) { done_a_[a] = 0; }

    // Picks the open A-vertex with fewest available edges; returns -1 if none
    // has any. Fills `ub` with an upper bound on further edges.
    int choose(int& ub, std::vector<Edge>& options) {
        int rows = 0, best_a = -1, best_cnt = 1 << 30;
        seen_b_.assign(g_.b_size(), 0);
        seen_c_.assign(g_.colour_bound(), 0);
        int cols = 0, cols_c = 0;
        for (int a = 0; a < g_.a_size(); ++a) {
            if (done_a_[a]) continue;
            int cnt = 0;
            for (int b : g_.a_neighbours(a)) {
                int c = g_.colour_of(a, b);
                if (used_b_[b] || used_c_[c]) continue;
                ++cnt;
                if (!seen_b_[b]) seen_b_[b] = 1, ++cols;
                if (!seen_c_[c]) seen_c_[c] = 1, ++cols_c;
            }
            if (cnt == 0) continue;
            ++rows;
            if (cnt < best_cnt) best_cnt = cnt, best_a = a;
        }
        ub = std::min({rows, cols, cols_c});
        options.clear();
        if (best_a >= 0)
            for (int b : g_.a_neighbours(best_a)) {
                int c = g_.colour_of(best_a, b);
                if (!used_b_[b] && !used_c_[c]) options.push_back({best_a, b, c});
            }
        return best_a;
    }

    void record() {
        int sz = static_cast<int>(cur_.size());
        if (sz <= sh_.best.load()) return;
        std::lock_guard<std::mutex> lk(sh_.mu);
        if (sz > sh_.best.load()) {
            sh_.best.store(sz);
            sh_.witness = cur_;
            if (sz >= sh_.root_ub) sh_.closed.store(true);
        }
    }

    bool stop() const { return sh_.aborted.load(std::memory_order_relaxed) || sh_.closed.load(std::memory_order_relaxed); }

    void search() {
        if (stop()) return;
        std::uint64_t n = sh_.nodes.fetch_add(1, std::memory_order_relaxed) + 1;
        if (sh_.budget && n > sh_.budget) {
            sh_.aborted.store(true);
            return;
        }
        record();
        int ub = 0;
        std::vector<Edge> options;
        int a = choose(ub, options);
        if (a < 0 || static_cast<int>(cur_.size()) + ub <= sh_.best.load()) return;
        for (const Edge& e : options) {
            take(e);
            search();
            untake(e);
            if (stop()) return;
        }
        skip(a);
        search();
        unskip(a);
    }

    const ColouredBipartiteGraph& g_;
    Shared& sh_;
    std::vector<char> used_b_, used_c_, done_a_, seen_b_, seen_c_;
    std::vector<Edge> cur_;
};

std::vector<Edge> greedy_in_order(const ColouredBipartiteGraph& g) {
    std::vector<char> ub(g.b_size(), 0), uc(g.colour_bound(), 0);
    std::vector<Edge> m;
    for (int a = 0; a < g.a_size(); ++a)
        for (int b : g.a_neighbours(a)) {
            int c = g.colour_of(a, b);
            if (!ub[b] && !uc[c]) {
                ub[b] = uc[c] = 1;
                m.push_back({a, b, c});
                break;
            }
        }
    return m;
}

}  // namespace

ExactResult max_rainbow_matching_exact(const ColouredBipartiteGraph& graph, const ExactOptions& opts) {
    Shared sh;
    sh.budget = opts.budget;
    sh.witness = greedy_in_order(graph);
    sh.best = static_cast<int>(sh.witness.size());
    const int root_ub = std::min(max_bipartite_matching(graph), graph.colour_count());
    sh.root_ub = root_ub;

    if (sh.best.load() < root_ub) {
        BranchAndBound root(graph, sh);
        int ub = 0;
        std::vector<Edge> options;
        int a = root.choose(ub, options);
        const int threads = std::max(1, opts.threads);
        if (a >= 0 && threads > 1 && options.size() > 1) {
            // Root branches (each option, then the skip branch) are shared out.
            std::atomic<std::size_t> next{0};
            const std::size_t total = options.size() + 1;
            auto worker = [&]() {
                BranchAndBound bb(graph, sh);
                for (std::size_t k; (k = next.fetch_add(1)) < total;) {
                    if (k < options.size()) {
                        bb.take(options[k]);
                        bb.search();
                        bb.untake(options[k]);
                    } else {
                        bb.skip(a);
                        bb.search();
                        bb.unskip(a);
                    }
                }
            };
            std::vector<std::thread> pool;
            for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        } else {
            root.search();
        }
    }
    ExactResult res;
    res.size = sh.best.load();
    res.witness.edges = sh.witness;
    std::sort(res.witness.edges.begin(), res.witness.edges.end());
    res.optimal = !sh.aborted.load();
    res.nodes = sh.nodes.load();
    return res;
}

std::uint64_t count_full_transversals(const LatinArray& square) {
    const int n = square.order();
    if (n > kCountTransversalCap)
        throw PreconditionError("count_full_transversals: order " + std::to_string(n) + " exceeds cap " +
                                std::to_string(kCountTransversalCap));
    if (n == 0) return 1;
    auto [sq, map] = relabel_first_appearance(square);
    require(sq.symbol_count() <= 32, "count_full_transversals: more than 32 symbols");
    std::vector<std::pair<std::uint64_t, std::uint64_t>> layer{{0, 1}};
    for (int row = 0; row < n; ++row) {
        std::vector<std::pair<std::uint64_t, std::uint64_t>> next;
        for (auto [st, cnt] : layer) {
            std::uint32_t cm = static_cast<std::uint32_t>(st >> 32), sm = static_cast<std::uint32_t>(st);
            for (int c = 0; c < n; ++c) {
                if (cm >> c & 1u) continue;
                int y = sq.at(row, c);
                if (y == kEmpty || (sm >> y & 1u)) continue;
                next.push_back({static_cast<std::uint64_t>(cm | 1u << c) << 32 | (sm | 1u << y), cnt});
            }
        }
        std::sort(next.begin(), next.end());
        layer.clear();
        for (auto& p : next) {
            if (!layer.empty() && layer.back().first == p.first)
                layer.back().second += p.second;
            else
                layer.push_back(p);
        }
        if (layer.empty()) return 0;
    }
    std::uint64_t total = 0;
    for (auto& p : layer) total += p.second;
    return total;
}

RainbowMatching greedy_nibble_matching(const ColouredBipartiteGraph& g, double bite_fraction, std::uint64_t seed) {
    require(bite_fraction > 0.0 && bite_fraction < 1.0, "greedy_nibble_matching: bite fraction must lie in (0,1)");
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution bite(bite_fraction);
    std::vector<char> ua(g.a_size(), 0), ub(g.b_size(), 0), uc(g.colour_bound(), 0);
    std::vector<Edge> m;
    std::vector<int> order(g.a_size());
    std::iota(order.begin(), order.end(), 0);
    int idle = 0;
    while (idle < 20) {
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<Edge> picks;
        bool any_available = false;
        for (int a : order) {
            if (ua[a]) continue;
            std::vector<Edge> avail;
            for (int b : g.a_neighbours(a)) {
                int c = g.colour_of(a, b);
                if (!ub[b] && !uc[c]) avail.push_back({a, b, c});
            }
            if (avail.empty()) continue;
            any_available = true;
            if (!bite(rng)) continue;
            picks.push_back(avail[std::uniform_int_distribution<std::size_t>(0, avail.size() - 1)(rng)]);
        }
        if (!any_available) break;
        if (picks.empty()) {
            ++idle;
            continue;
        }
        idle = 0;
        // Conflicting bites: the first in a random order wins.
        std::shuffle(picks.begin(), picks.end(), rng);
        for (const Edge& e : picks) {
            if (ub[e.b] || uc[e.colour]) continue;
            ua[e.a] = ub[e.b] = uc[e.colour] = 1;
            m.push_back(e);
        }
    }
    for (int a = 0; a < g.a_size(); ++a) {
        if (ua[a]) continue;
        for (int b : g.a_neighbours(a)) {
            int c = g.colour_of(a, b);
            if (!ub[b] && !uc[c]) {
                ua[a] = ub[b] = uc[c] = 1;
                m.push_back({a, b, c});
                break;
            }
        }
    }
    std::sort(m.begin(), m.end());
    return {m};
}

RainbowMatching local_switch_augment(const ColouredBipartiteGraph& g, const RainbowMatching& start, int rounds,
                                     std::uint64_t seed) {
    check_rainbow_matching(g, start.edges);
    std::mt19937_64 rng(seed);
    std::vector<Edge> m = start.edges;
    std::vector<char> ua(g.a_size(), 0), ub(g.b_size(), 0), uc(g.colour_bound(), 0);
    for (const Edge& e : m) ua[e.a] = ub[e.b] = uc[e.colour] = 1;
    const int ceiling = std::min({g.a_size(), g.b_size(), g.colour_count()});
    auto set = [&](const Edge& e, char v) { ua[e.a] = ub[e.b] = uc[e.colour] = v; };
    auto rnd = [&](std::size_t k) { return std::uniform_int_distribution<std::size_t>(0, k - 1)(rng); };

    for (int round = 0; round < rounds && static_cast<int>(m.size()) < ceiling; ++round) {
        // add a free edge
        bool moved = false;
        std::vector<Edge> free_edges;
        for (const Edge& e : g.edges())
            if (!ua[e.a] && !ub[e.b] && !uc[e.colour]) free_edges.push_back(e);
        if (!free_edges.empty()) {
            Edge e = free_edges[rnd(free_edges.size())];
            set(e, 1);
            m.push_back(e);
            continue;
        }
        // one edge out, two in
        std::vector<std::size_t> idx(m.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t i : idx) {
            Edge out = m[i];
            set(out, 0);
            std::vector<Edge> via_a, via_b;
            for (int b : g.a_neighbours(out.a)) {
                int c = g.colour_of(out.a, b);
                if (b != out.b && !ub[b] && !uc[c]) via_a.push_back({out.a, b, c});
            }
            for (int a : g.b_neighbours(out.b)) {
                int c = g.colour_of(a, out.b);
                if (a != out.a && !ua[a] && !uc[c]) via_b.push_back({a, out.b, c});
            }
            std::shuffle(via_a.begin(), via_a.end(), rng);
            std::shuffle(via_b.begin(), via_b.end(), rng);
            for (const Edge& x : via_a) {
                for (const Edge& y : via_b)
                    if (x.colour != y.colour) {
                        m[i] = x;
                        m.push_back(y);
                        set(x, 1);
                        set(y, 1);
                        moved = true;
                        break;
                    }
                if (moved) break;
            }
            if (moved) break;
            set(out, 1);
        }
        if (moved || m.empty()) continue;
        // sideways move: swap one edge for another of the same size
        std::size_t i = rnd(m.size());
        Edge out = m[i];
        set(out, 0);
        std::vector<Edge> alt;
        for (int b : g.a_neighbours(out.a)) {
            int c = g.colour_of(out.a, b);
            if (!ub[b] && !uc[c] && !(b == out.b)) alt.push_back({out.a, b, c});
        }
        for (int a : g.b_neighbours(out.b)) {
            int c = g.colour_of(a, out.b);
            if (!ua[a] && !uc[c] && a != out.a) alt.push_back({a, out.b, c});
        }
        if (alt.empty()) {
            set(out, 1);
            continue;
        }
        m[i] = alt[rnd(alt.size())];
        set(m[i], 1);
    }
    std::sort(m.begin(), m.end());
    return {m};
}

RareColourResult rare_colour_matching(const ColouredBipartiteGraph& g, int d) {
    const int n = g.a_size();
    require(g.b_size() == n, "rare_colour_matching: classes must have equal size");
    require(d >= 0, "rare_colour_matching: d must be non-negative");
    require(100LL * d <= n, "rare_colour_matching: need d <= N/100");
    for (int c : g.colours())
        require(100LL * static_cast<long long>(g.colour_class(c).size()) <= n,
                "rare_colour_matching: colour " + std::to_string(c) + " appears more than N/100 times");
    require(g.min_degree() >= d, "rare_colour_matching: minimum degree below d");

    RareColourResult res;
    res.target = (18 * d + 9) / 10;
    std::vector<char> ua(n, 0), ub(n, 0), uc(g.colour_bound(), 0);
    std::vector<Edge> m;
    auto make_maximal = [&]() {
        for (const Edge& e : g.edges())
            if (!ua[e.a] && !ub[e.b] && !uc[e.colour]) {
                ua[e.a] = ub[e.b] = uc[e.colour] = 1;
                m.push_back(e);
            }
    };
    make_maximal();
    while (static_cast<int>(m.size()) < res.target) {
        bool moved = false;
        for (std::size_t i = 0; i < m.size() && !moved; ++i) {
            const Edge e = m[i];
            // a_i b'_i and a'_i b_i with fresh endpoints and colours outside C(M)
            for (int b2 : g.a_neighbours(e.a)) {
                int c1 = g.colour_of(e.a, b2);
                if (ub[b2] || uc[c1]) continue;
                for (int a2 : g.b_neighbours(e.b)) {
                    int c2 = g.colour_of(a2, e.b);
                    if (ua[a2] || uc[c2] || c2 == c1) continue;
                    ub[e.b] = 1;  // stays covered by a2
                    uc[e.colour] = 0;
                    m[i] = {e.a, b2, c1};
                    m.push_back({a2, e.b, c2});
                    ub[b2] = ua[a2] = uc[c1] = uc[c2] = 1;
                    moved = true;
                    break;
                }
                if (moved) break;
            }
        }
        if (!moved) {
            res.note = "no exchange available below target";
            break;
        }
        ++res.exchanges;
        make_maximal();
    }
    std::sort(m.begin(), m.end());
    res.matching.edges = m;
    res.reached = static_cast<int>(m.size()) >= res.target;
    return res;
}

}  // namespace tvl
