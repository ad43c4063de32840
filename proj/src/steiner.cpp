#include "tvl/steiner.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <thread>

#include "tvl/solvers.hpp"

namespace tvl {

std::string sts_problem(const TripleSystem& s) {
    const int n = s.n;
    if (n < 0) return "negative order";
    if (n % 6 != 1 && n % 6 != 3 && n != 0) return "order must be 1 or 3 mod 6";
    if (static_cast<long long>(s.triples.size()) * 6 != static_cast<long long>(n) * (n - 1))
        return "wrong number of triples";
    std::vector<int> cover(static_cast<std::size_t>(n) * n, 0);
    for (const Triple& t : s.triples) {
        for (int x : t)
            if (x < 0 || x >= n) return "point out of range";
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) return "degenerate triple";
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j) {
                int& k = cover[static_cast<std::size_t>(std::min(t[i], t[j])) * n + std::max(t[i], t[j])];
                if (++k > 1) return "pair covered twice";
            }
    }
    return {};
}

TripleSystem bose_sts(int m) {
    require(m >= 1 && m % 2 == 1, "bose_sts: m must be odd");
    // idempotent commutative quasigroup x o y = (x + y) / 2 on Z_m
    const int half = (m + 1) / 2;
    auto op = [&](int x, int y) { return static_cast<int>((static_cast<long long>(x + y) * half) % m); };
    auto pt = [&](int x, int i) { return i * m + x; };
    TripleSystem s;
    s.n = 3 * m;
    for (int x = 0; x < m; ++x) s.triples.push_back({pt(x, 0), pt(x, 1), pt(x, 2)});
    for (int i = 0; i < 3; ++i)
        for (int x = 0; x < m; ++x)
            for (int y = x + 1; y < m; ++y) s.triples.push_back({pt(x, i), pt(y, i), pt(op(x, y), (i + 1) % 3)});
    for (Triple& t : s.triples) std::sort(t.begin(), t.end());
    std::sort(s.triples.begin(), s.triples.end());
    return s;
}

Reduction tripartition_reduce(const TripleSystem& s, std::uint64_t seed, bool balanced, int max_attempts) {
    require(sts_problem(s).empty(), "tripartition_reduce: not a Steiner triple system: " + sts_problem(s));
    Reduction red;
    int n = s.n;
    if (n % 6 == 1) {
        red.deleted_point = n - 1;
        --n;
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> part(0, 2);
    std::vector<int> side(n);
    for (int attempt = 1;; ++attempt) {
        int counts[3] = {0, 0, 0};
        for (int v = 0; v < n; ++v) counts[side[v] = part(rng)]++;
        red.attempts = attempt;
        red.balanced = counts[0] == counts[1] && counts[1] == counts[2];
        if (!balanced || red.balanced) break;
        if (attempt >= max_attempts) throw SearchExhausted("tripartition", "no balanced partition found");
    }
    std::vector<int> dense(n);
    for (int v = 0; v < n; ++v) {
        auto& P = side[v] == 0 ? red.part_a : side[v] == 1 ? red.part_b : red.part_c;
        dense[v] = static_cast<int>(P.size());
        P.push_back(v);
    }
    std::vector<Edge> edges;
    for (const Triple& t : s.triples) {
        int a = -1, b = -1, c = -1;
        bool skip = false;
        for (int x : t) {
            if (x == red.deleted_point) {
                skip = true;
                break;
            }
            (side[x] == 0 ? a : side[x] == 1 ? b : c) = dense[x];
        }
        if (!skip && a >= 0 && b >= 0 && c >= 0) edges.push_back({a, b, c});
    }
    red.graph = ColouredBipartiteGraph(static_cast<int>(red.part_a.size()), static_cast<int>(red.part_b.size()),
                                       std::move(edges));
    return red;
}

std::vector<Triple> matching_from_rainbow(const TripleSystem& s, const RainbowMatching& m, const Reduction& red) {
    check_rainbow_matching(red.graph, m.edges);
    std::set<Triple> all(s.triples.begin(), s.triples.end());
    std::vector<Triple> out;
    std::set<int> used;
    for (const Edge& e : m.edges) {
        Triple t{red.part_a[e.a], red.part_b[e.b], red.part_c[e.colour]};
        std::sort(t.begin(), t.end());
        require(all.count(t) == 1, "matching_from_rainbow: edge does not come from a triple");
        for (int x : t) require(used.insert(x).second, "matching_from_rainbow: triples overlap");
        out.push_back(t);
    }
    std::sort(out.begin(), out.end());
    return out;
}

BrouwerReport brouwer_pipeline(const TripleSystem& s, int seeds, const BrouwerOptions& opts) {
    require(seeds >= 1, "brouwer_pipeline: need at least one seed");
    BrouwerReport rep;
    rep.target = std::max(0, (s.n - 4 + 2) / 3);
    rep.size_per_seed.assign(seeds, 0);
    rep.exact_per_seed.assign(seeds, false);
    std::vector<std::vector<Triple>> found(seeds);

    auto run = [&](int i) {
        Reduction red = tripartition_reduce(s, static_cast<std::uint64_t>(i), true);
        RainbowMatching m;
        if (red.graph.a_size() <= opts.exact_cap) {
            ExactOptions eo;
            eo.budget = opts.exact_budget;
            auto r = max_rainbow_matching_exact(red.graph, eo);
            m = r.witness;
            rep.exact_per_seed[i] = r.optimal;
        } else {
            m = greedy_nibble_matching(red.graph, 0.1, static_cast<std::uint64_t>(i));
            m = local_switch_augment(red.graph, m, opts.heuristic_rounds, static_cast<std::uint64_t>(i));
        }
        found[i] = matching_from_rainbow(s, m, red);
        rep.size_per_seed[i] = static_cast<int>(found[i].size());
    };
    const int threads = std::max(1, opts.threads);
    if (threads == 1) {
        for (int i = 0; i < seeds; ++i) run(i);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&]() {
                for (int i; (i = next.fetch_add(1)) < seeds;) run(i);
            });
        for (auto& th : pool) th.join();
    }
    for (int i = 0; i < seeds; ++i)
        if (found[i].size() > rep.best.size() || i == 0) {
            rep.best = found[i];
            rep.best_seed = static_cast<std::uint64_t>(i);
        }
    rep.seeds_run = seeds;
    rep.achieved = static_cast<int>(rep.best.size()) >= rep.target;
    return rep;
}

int max_sts_matching(const TripleSystem& s) {
    require(s.n <= 40, "max_sts_matching: order above 40");
    std::vector<std::vector<int>> through(s.n);
    for (std::size_t i = 0; i < s.triples.size(); ++i)
        for (int x : s.triples[i]) through[x].push_back(static_cast<int>(i));
    std::vector<char> used(s.n, 0);
    int best = 0;
    std::function<void(int, int, int)> dfs = [&](int from, int size, int free) {
        best = std::max(best, size);
        if (size + free / 3 <= best) return;
        int v = from;
        while (v < s.n && used[v]) ++v;
        if (v >= s.n) return;
        for (int ti : through[v]) {
            const Triple& t = s.triples[ti];
            if (used[t[0]] || used[t[1]] || used[t[2]]) continue;
            for (int x : t) used[x] = 1;
            dfs(v + 1, size + 1, free - 3);
            for (int x : t) used[x] = 0;
        }
        // leave v uncovered
        used[v] = 1;
        dfs(v + 1, size, free - 1);
        used[v] = 0;
    };
    dfs(0, 0, s.n);
    return best;
}

}  // namespace tvl
