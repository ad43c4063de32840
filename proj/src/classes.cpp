#include "tvl/classes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <thread>

#include "tvl/errors.hpp"

namespace tvl {

namespace {

// Nearest-rank quantile of a sorted list.
double quantile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
    return sorted[std::clamp<std::size_t>(k, 1, sorted.size()) - 1];
}

struct Pair {
    int c, d;
    double w;
};

}  // namespace

ColourClassFamily classify_colours(const SwitcherWeights& weights, const ClassifierConfig& cfg,
                                   const ColouredBipartiteGraph& graph) {
    require(weights.colour_bound == graph.colour_bound(), "classify_colours: weights were computed on another graph");
    const int bound = weights.colour_bound;
    ColourClassFamily fam;
    fam.multiplicity.assign(bound, 0);

    std::vector<Pair> pairs;
    std::vector<double> nz;
    for (const auto& row : weights.nonzero()) {
        Pair p{static_cast<int>(row[0]), static_cast<int>(row[1]), static_cast<double>(row[2])};
        pairs.push_back(p);
        nz.push_back(p.w);
        fam.total_weight += p.w;
    }
    std::sort(nz.begin(), nz.end());
    // unset cut points are clamped against the explicit ones
    const double inf = std::numeric_limits<double>::infinity();
    fam.w0 = cfg.w0.value_or(std::min({quantile(nz, 0.50), cfg.w1.value_or(inf), cfg.w2.value_or(inf)}));
    fam.w2 = cfg.w2.value_or(std::max({quantile(nz, 0.95), cfg.w1.value_or(0.0), fam.w0}));
    fam.w1 = cfg.w1.value_or(std::clamp(quantile(nz, 0.75), fam.w0, std::max(fam.w0, fam.w2)));
    require(fam.w0 >= 0 && fam.w0 <= fam.w1 && fam.w1 <= fam.w2, "classify_colours: need 0 <= w0 <= w1 <= w2");

    const int nc = std::max(1, graph.colour_count());
    fam.multiplicity_cap = cfg.multiplicity_cap > 0
                               ? cfg.multiplicity_cap
                               : static_cast<int>(std::ceil(std::pow(std::log2(std::max(2, nc)), 2)));

    std::vector<Pair> moderate;
    for (const Pair& p : pairs) {
        if (p.w > fam.w2) {
            ++fam.heavy_pairs;
            ColourClass cl;
            cl.kind = ColourClass::Heavy;
            cl.colours = {p.c, p.d};
            fam.classes.push_back(cl);
        } else if (p.w > fam.w1) {
            ++fam.moderate_pairs;
            moderate.push_back(p);
        } else if (p.w > fam.w0) {
            ++fam.light_pairs;
        } else {
            ++fam.very_light_pairs;
        }
    }

    if (!moderate.empty()) {
        double base = fam.w1;
        if (base <= 0) {
            base = moderate[0].w;
            for (const Pair& p : moderate) base = std::min(base, p.w);
            base /= 2;
        }
        int bands = std::max(1, static_cast<int>(std::ceil(std::log2(fam.w2 / base) - 1e-12)));
        bands = std::max(bands, cfg.band_count);
        const double ratio = std::pow(fam.w2 / base, 1.0 / bands);
        fam.band_edges.push_back(base);
        for (int i = 1; i < bands; ++i) fam.band_edges.push_back(base * std::pow(ratio, i));
        fam.band_edges.push_back(fam.w2);

        std::vector<std::vector<Pair>> by_band(bands);
        for (const Pair& p : moderate) {
            int i = static_cast<int>(std::upper_bound(fam.band_edges.begin() + 1, fam.band_edges.end() - 1, p.w,
                                                      [](double w, double e) { return w <= e; }) -
                                     (fam.band_edges.begin() + 1));
            by_band[i].push_back(p);
        }

        for (int band = 0; band < bands; ++band) {
            std::vector<std::pair<int, int>> left;
            for (const Pair& p : by_band[band]) left.push_back({p.c, p.d});
            while (!left.empty()) {
                // auxiliary graph on the colours still touched by band edges
                std::vector<int> ids;
                for (auto [c, d] : left) ids.push_back(c), ids.push_back(d);
                std::sort(ids.begin(), ids.end());
                ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
                std::map<int, int> pos;
                for (std::size_t i = 0; i < ids.size(); ++i) pos[ids[i]] = static_cast<int>(i);
                std::vector<std::pair<int, int>> e;
                for (auto [c, d] : left) e.push_back({pos[c], pos[d]});
                SimpleGraph aux(static_cast<int>(ids.size()), e);
                auto res = extract_expander(aux, cfg.alpha, cfg.seed);
                if (res.h.edge_count() == 0) break;
                ColourClass cl;
                cl.kind = ColourClass::Band;
                cl.band = band;
                cl.d_input = aux.average_degree();
                cl.d_expander = res.h.average_degree();
                cl.min_degree = res.h.min_degree();
                cl.steps = res.trace.size();
                cl.stop_mode = res.stop_mode;
                for (int v : res.h.labels()) cl.colours.push_back(ids[v]);
                std::sort(cl.colours.begin(), cl.colours.end());
                std::vector<char> in(bound, 0);
                for (int c : cl.colours) in[c] = 1;
                std::erase_if(left, [&](const std::pair<int, int>& p) { return in[p.first] && in[p.second]; });
                fam.classes.push_back(std::move(cl));
            }
        }
    }

    std::vector<char> covered(static_cast<std::size_t>(bound) * bound, 0);
    for (const auto& cl : fam.classes) {
        for (int c : cl.colours)
            for (int d : cl.colours) covered[static_cast<std::size_t>(c) * bound + d] = 1;
        if (cl.colours.size() > 2)
            for (int c : cl.colours) ++fam.multiplicity[c];
    }
    for (const Pair& p : pairs)
        if (!covered[static_cast<std::size_t>(p.c) * bound + p.d]) fam.uncovered_weight += p.w;
    for (int c = 0; c < bound; ++c)
        if (fam.multiplicity[c] > fam.multiplicity_cap) fam.over_cap.push_back(c);
    return fam;
}

ExchangeReport test_pair_exchangeable(const SwitcherIndex& idx, int c, int d, const ExchangeParams& params, int trials,
                                      std::uint64_t seed) {
    const auto& g = idx.graph();
    require(c != d, "test_pair_exchangeable: c == d");
    require(c >= 0 && d >= 0 && c < g.colour_bound() && d < g.colour_bound(), "test_pair_exchangeable: colour out of range");
    require(params.epsilon >= 0 && params.epsilon < 1 && params.eta >= 0 && params.eta < 1,
            "test_pair_exchangeable: epsilon and eta must lie in [0,1)");
    require(params.L >= 0 && params.ell >= 0 && trials >= 0, "test_pair_exchangeable: negative L, ell or trials");

    ExchangeReport rep;
    rep.c = c;
    rep.d = d;
    rep.params = params;
    rep.forbidden_size =
        static_cast<std::size_t>(std::floor(params.epsilon * g.vertex_count() + 1e-9)) + static_cast<std::size_t>(params.L);

    const auto direct = params.ell >= 4 ? idx.between(c, d) : std::vector<ColourSwitcher>{};
    std::vector<int> others;
    for (int x : g.colours())
        if (x != c && x != d) others.push_back(x);

    for (int t = 0; t < trials; ++t) {
        std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                         static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(t)};
        std::mt19937_64 rng(ss);
        std::vector<int> verts(g.vertex_count());
        std::iota(verts.begin(), verts.end(), 0);
        std::shuffle(verts.begin(), verts.end(), rng);
        std::vector<int> cols = others;
        std::shuffle(cols.begin(), cols.end(), rng);
        verts.resize(std::min(verts.size(), rep.forbidden_size));
        cols.resize(std::min(cols.size(), rep.forbidden_size));

        ExchangeTrial tr;
        std::vector<char> bv(g.vertex_count(), 0), bc(g.colour_bound(), 0);
        for (int v : verts) bv[v] = 1;
        for (int x : cols) bc[x] = 1;
        std::sort(verts.begin(), verts.end());
        std::sort(cols.begin(), cols.end());
        tr.forbidden_vertices = verts;
        tr.forbidden_colours = cols;

        for (const auto& s : direct) {
            bool ok = true;
            for (int v : switcher_vertices(g, s)) ok = ok && !bv[v];
            for (int x : shared_colours(s)) ok = ok && !bc[x];
            if (ok) {
                tr.witness = s;
                break;
            }
        }
        int pivots = 0;
        if (!tr.witness && params.ell >= 8) {
            for (int b : others) {
                if (bc[b]) continue;
                ++pivots;
                ColourSwitcher s;
                if (find_chain_switcher(idx, {c, b, d}, bv, bc, s)) {
                    tr.witness = s;
                    break;
                }
            }
        }
        tr.passed = tr.witness.has_value();
        if (tr.passed) {
            ++rep.passes;
        } else if (params.ell < 4) {
            tr.certificate = "order cap below 4";
        } else {
            tr.certificate = "exhausted at order " + std::to_string(params.ell) + ": none of " +
                             std::to_string(direct.size()) + " order-4 switchers avoids the forbidden sets";
            if (params.ell >= 8) tr.certificate += ", no order-8 composite via " + std::to_string(pivots) + " pivots";
        }
        rep.trials.push_back(std::move(tr));
    }
    return rep;
}

ExchangeReport test_pair_exchangeable(const ColouredBipartiteGraph& graph, int c, int d, const ExchangeParams& params,
                                      int trials, std::uint64_t seed) {
    SwitcherIndex idx(graph);
    return test_pair_exchangeable(idx, c, d, params, trials, seed);
}

ClassExchangeReport test_class_exchangeable(const SwitcherIndex& idx, const std::vector<int>& colours,
                                            const ExchangeParams& params, int trials, std::uint64_t seed,
                                            int threads) {
    ClassExchangeReport rep;
    rep.colours = colours;
    std::sort(rep.colours.begin(), rep.colours.end());
    rep.colours.erase(std::unique(rep.colours.begin(), rep.colours.end()), rep.colours.end());
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t i = 0; i < rep.colours.size(); ++i)
        for (std::size_t j = i + 1; j < rep.colours.size(); ++j) pairs.push_back({rep.colours[i], rep.colours[j]});

    std::vector<char> failed(pairs.size(), 0);
    auto work = [&](int part, int parts) {
        for (std::size_t i = part; i < pairs.size(); i += parts)
            failed[i] = !test_pair_exchangeable(idx, pairs[i].first, pairs[i].second, params, trials, seed).all_passed();
    };
    threads = std::max(1, threads);
    if (threads == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (int p = 0; p < threads; ++p) pool.emplace_back(work, p, threads);
        for (auto& th : pool) th.join();
    }
    for (std::size_t i = 0; i < pairs.size(); ++i)
        if (failed[i]) rep.failing_pairs.push_back(pairs[i]);

    auto open = rep.failing_pairs;
    while (!open.empty()) {
        std::map<int, int> deg;
        for (auto [x, y] : open) ++deg[x], ++deg[y];
        int pick = deg.begin()->first;
        for (auto [x, k] : deg)
            if (k > deg[pick]) pick = x;
        rep.exceptional.push_back(pick);
        std::erase_if(open, [&](const std::pair<int, int>& p) { return p.first == pick || p.second == pick; });
    }
    std::sort(rep.exceptional.begin(), rep.exceptional.end());
    rep.passed = static_cast<double>(rep.exceptional.size()) <= params.eta * static_cast<double>(rep.colours.size()) + 1e-9;
    return rep;
}

}  // namespace tvl
