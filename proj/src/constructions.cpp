#include "tvl/constructions.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <tuple>

namespace tvl {

FiniteAbelianGroup::FiniteAbelianGroup(std::vector<int> invariant_factors) : factors_(std::move(invariant_factors)) {
    order_ = 1;
    for (int f : factors_) {
        require(f >= 2, "FiniteAbelianGroup: factors must be >= 2");
        require(order_ <= (1 << 20) / f, "FiniteAbelianGroup: order too large");
        order_ *= f;
    }
    require(order_ <= 4096, "FiniteAbelianGroup: order above 4096 is not supported");
    table_.resize(static_cast<std::size_t>(order_) * order_);
    std::vector<GroupElement> elems(order_);
    for (int i = 0; i < order_; ++i) elems[i] = element(i);
    for (int i = 0; i < order_; ++i)
        for (int j = 0; j < order_; ++j) table_[static_cast<std::size_t>(i) * order_ + j] = index(add(elems[i], elems[j]));
}

FiniteAbelianGroup FiniteAbelianGroup::cyclic(int n) {
    require(n >= 1, "cyclic group order must be positive");
    return n == 1 ? FiniteAbelianGroup(std::vector<int>{}) : FiniteAbelianGroup(std::vector<int>{n});
}

GroupElement FiniteAbelianGroup::element(int idx) const {
    GroupElement g(factors_.size());
    for (int k = static_cast<int>(factors_.size()) - 1; k >= 0; --k) {
        g[k] = idx % factors_[k];
        idx /= factors_[k];
    }
    return g;
}

int FiniteAbelianGroup::index(const GroupElement& g) const {
    int idx = 0;
    for (std::size_t k = 0; k < factors_.size(); ++k) idx = idx * factors_[k] + g[k];
    return idx;
}

GroupElement FiniteAbelianGroup::add(const GroupElement& x, const GroupElement& y) const {
    GroupElement z(factors_.size());
    for (std::size_t k = 0; k < factors_.size(); ++k) z[k] = (x[k] + y[k]) % factors_[k];
    return z;
}

GroupElement FiniteAbelianGroup::scale(const GroupElement& x, int m) const {
    GroupElement z(factors_.size());
    for (std::size_t k = 0; k < factors_.size(); ++k) {
        long long v = static_cast<long long>(x[k]) * m % factors_[k];
        z[k] = static_cast<int>((v + factors_[k]) % factors_[k]);
    }
    return z;
}

bool FiniteAbelianGroup::sylow2_trivial_or_noncyclic() const {
    int even = 0;
    for (int f : factors_) even += (f % 2 == 0);
    return even != 1;
}

static void gen_groups(int remaining, int prev, std::vector<int>& cur, std::vector<FiniteAbelianGroup>& out) {
    if (remaining == 1) {
        out.emplace_back(cur);
        return;
    }
    // Next factor is a multiple of prev and must divide what remains, and
    // every later factor is a multiple of it, so it must divide `remaining`.
    for (int f = prev; f <= remaining; f += prev) {
        if (remaining % f != 0) continue;
        // the product of later factors is remaining / f and each is a multiple of f
        int rest = remaining / f;
        if (rest != 1 && rest % f != 0) continue;
        cur.push_back(f);
        gen_groups(rest, f, cur, out);
        cur.pop_back();
    }
}

std::vector<FiniteAbelianGroup> abelian_groups_of_order(int n) {
    require(n >= 1, "abelian_groups_of_order: n must be positive");
    std::vector<FiniteAbelianGroup> out;
    if (n == 1) {
        out.emplace_back(std::vector<int>{});
        return out;
    }
    std::vector<int> cur;
    for (int f = 2; f <= n; ++f) {
        if (n % f != 0) continue;
        int rest = n / f;
        if (rest != 1 && rest % f != 0) continue;
        cur = {f};
        gen_groups(rest, f, cur, out);
    }
    return out;
}

LatinArray group_table(const FiniteAbelianGroup& group) {
    const int n = group.order();
    std::vector<std::vector<int>> rows(n, std::vector<int>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) rows[i][j] = group.add_index(i, j);
    return LatinArray(std::move(rows));
}

LatinArray maillet_blowup(const MailletSpec& spec) {
    const int h = spec.base_group.order();
    const int m = spec.block_size;
    require(m >= 1, "maillet_blowup: block size must be positive");
    const bool cyclic_blocks = spec.inner_colourings.empty();
    require(cyclic_blocks || static_cast<int>(spec.inner_colourings.size()) == h * h,
            "maillet_blowup: need one inner colouring per (v, w) pair");
    if (!cyclic_blocks) {
        for (const LatinArray& blk : spec.inner_colourings) {
            require(blk.order() == m, "maillet_blowup: inner block has wrong order");
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    require(blk.at(i, j) >= 0 && blk.at(i, j) < m, "maillet_blowup: inner block must use symbols 0..m-1");
            require(blk.is_latin_square(), "maillet_blowup: inner block is not a proper colouring of the block");
        }
    }
    const int n = m * h;
    std::vector<std::vector<int>> rows(n, std::vector<int>(n));
    for (int v = 0; v < h; ++v)
        for (int w = 0; w < h; ++w) {
            int base = spec.base_group.add_index(v, w) * m;
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) {
                    int inner = cyclic_blocks ? (i + j) % m : spec.inner_colourings[v * h + w].at(i, j);
                    rows[v * m + i][w * m + j] = base + inner;
                }
        }
    return LatinArray(std::move(rows));
}

std::vector<LatinArray> random_inner_blocks(const FiniteAbelianGroup& group, int m, std::uint64_t seed) {
    const int h = group.order();
    std::vector<LatinArray> out;
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x6d61u};
    std::mt19937_64 rng(seq);
    for (int k = 0; k < h * h; ++k) out.push_back(random_latin_square(m, rng(), 50 + 10 * m * m));
    return out;
}

GroupElement group_sum_obstruction(const FiniteAbelianGroup& group, int m) {
    GroupElement sum = group.identity();
    for (int i = 0; i < group.order(); ++i) sum = group.add(sum, group.element(i));
    return group.scale(sum, m);
}

namespace {

// Incidence cube of a (possibly improper) Latin square for the +-1 move chain.
struct Cube {
    int n;
    std::vector<signed char> v;
    explicit Cube(int n_) : n(n_), v(static_cast<std::size_t>(n_) * n_ * n_, 0) {}
    signed char& at(int r, int c, int s) { return v[(static_cast<std::size_t>(r) * n + c) * n + s]; }
};

}  // namespace

LatinArray random_latin_square(int n, std::uint64_t seed, int burn_in) {
    require(n >= 1, "random_latin_square: n must be positive");
    require(burn_in >= 0, "random_latin_square: burn_in must be non-negative");
    if (n == 1) return LatinArray({{0}});
    Cube cube(n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) cube.at(r, c, (r + c) % n) = 1;
    std::mt19937_64 rng(seed);
    auto pick = [&](int k) { return static_cast<int>(std::uniform_int_distribution<int>(0, k - 1)(rng)); };

    bool proper = true;
    int ir = 0, ic = 0, is = 0;  // improper cell when !proper
    auto step = [&]() {
        int r, c, s, r2, c2, s2;
        if (proper) {
            r = pick(n);
            c = pick(n);
            int cur = 0;
            while (cube.at(r, c, cur) != 1) ++cur;
            s = pick(n - 1);
            if (s >= cur) ++s;
            s2 = cur;
            c2 = 0;
            while (cube.at(r, c2, s) != 1) ++c2;
            r2 = 0;
            while (cube.at(r2, c, s) != 1) ++r2;
        } else {
            r = ir, c = ic, s = is;
            int opts[2] = {0, 0}, k = 0;
            for (int t = 0; t < n && k < 2; ++t)
                if (cube.at(r, c, t) == 1) opts[k++] = t;
            s2 = opts[pick(2)];
            k = 0;
            for (int t = 0; t < n && k < 2; ++t)
                if (cube.at(r, t, s) == 1) opts[k++] = t;
            c2 = opts[pick(2)];
            k = 0;
            for (int t = 0; t < n && k < 2; ++t)
                if (cube.at(t, c, s) == 1) opts[k++] = t;
            r2 = opts[pick(2)];
        }
        cube.at(r, c, s) += 1;
        cube.at(r, c2, s2) += 1;
        cube.at(r2, c, s2) += 1;
        cube.at(r2, c2, s) += 1;
        cube.at(r, c, s2) -= 1;
        cube.at(r, c2, s) -= 1;
        cube.at(r2, c, s) -= 1;
        cube.at(r2, c2, s2) -= 1;
        if (cube.at(r2, c2, s2) < 0) {
            proper = false;
            ir = r2, ic = c2, is = s2;
        } else {
            proper = true;
        }
    };
    for (int t = 0; t < burn_in; ++t) step();
    while (!proper) step();

    std::vector<std::vector<int>> rows(n, std::vector<int>(n));
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            for (int s = 0; s < n; ++s)
                if (cube.at(r, c, s) == 1) rows[r][c] = s;
    return LatinArray(std::move(rows));
}

CompleteMappingResult full_transversal_exists(const LatinArray& square, bool fix_first_row) {
    const int n = square.order();
    require(n <= 16, "full_transversal_exists: order above 16");
    CompleteMappingResult res;
    if (n == 0) {
        res.exists = true;
        res.witness = Transversal{};
        return res;
    }
    auto [sq, map] = relabel_first_appearance(square);
    require(sq.symbol_count() <= 32, "full_transversal_exists: more than 32 symbols");
    // state = colmask << 32 | symmask
    std::vector<std::vector<std::uint64_t>> layers(n + 1);
    layers[0].push_back(0);
    for (int row = 0; row < n; ++row) {
        std::vector<std::uint64_t> next;
        for (std::uint64_t st : layers[row]) {
            std::uint32_t cm = static_cast<std::uint32_t>(st >> 32), sm = static_cast<std::uint32_t>(st);
            for (int c = 0; c < n; ++c) {
                if (cm >> c & 1u) continue;
                if (fix_first_row && row == 0 && c != 0) continue;
                int y = sq.at(row, c);
                if (y == kEmpty || (sm >> y & 1u)) continue;
                next.push_back(static_cast<std::uint64_t>(cm | 1u << c) << 32 | (sm | 1u << y));
            }
        }
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        res.states_explored += next.size();
        layers[row + 1] = std::move(next);
        if (layers[row + 1].empty()) return res;
    }
    res.exists = true;
    Transversal t;
    std::uint64_t st = layers[n].front();
    for (int row = n - 1; row >= 0; --row) {
        std::uint32_t cm = static_cast<std::uint32_t>(st >> 32), sm = static_cast<std::uint32_t>(st);
        for (int c = 0; c < n; ++c) {
            if (!(cm >> c & 1u)) continue;
            int y = sq.at(row, c);
            if (y == kEmpty || !(sm >> y & 1u)) continue;
            std::uint64_t prev = static_cast<std::uint64_t>(cm & ~(1u << c)) << 32 | (sm & ~(1u << y));
            if (std::binary_search(layers[row].begin(), layers[row].end(), prev)) {
                t.cells.push_back({row, c});
                st = prev;
                break;
            }
        }
    }
    std::reverse(t.cells.begin(), t.cells.end());
    res.witness = t;
    return res;
}

CompleteMappingResult complete_mapping_exists(const FiniteAbelianGroup& group, int cap) {
    if (group.order() > cap)
        throw PreconditionError("complete_mapping_exists: order " + std::to_string(group.order()) + " exceeds cap " +
                                std::to_string(cap));
    require(cap <= 16, "complete_mapping_exists: cap above 16 is not supported");
    // Translating a complete mapping by a group element gives another, so the
    // cell used in row 0 may be fixed to column 0.
    return full_transversal_exists(group_table(group), true);
}

bool has_property_p(const ColouredBipartiteGraph& g) {
    // Length-3 paths a1-b1-a2-b2 keyed by colour pattern; closing edge a1b2.
    struct Path {
        int a1, b1, a2, b2, close;
    };
    std::map<std::tuple<int, int, int>, std::vector<Path>> by_pattern;
    for (const Edge& e1 : g.edges())
        for (int a2 : g.b_neighbours(e1.b)) {
            if (a2 == e1.a) continue;
            int y = g.colour_of(a2, e1.b);
            for (int b2 : g.a_neighbours(a2)) {
                if (b2 == e1.b) continue;
                by_pattern[{e1.colour, y, g.colour_of(a2, b2)}].push_back({e1.a, e1.b, a2, b2, g.colour_of(e1.a, b2)});
            }
        }
    for (auto& [pattern, paths] : by_pattern) {
        for (std::size_t i = 0; i < paths.size(); ++i)
            for (std::size_t j = i + 1; j < paths.size(); ++j) {
                const Path &p = paths[i], &q = paths[j];
                if (p.close == q.close) continue;
                bool disjoint = p.a1 != q.a1 && p.a1 != q.a2 && p.a2 != q.a1 && p.a2 != q.a2 && p.b1 != q.b1 &&
                                p.b1 != q.b2 && p.b2 != q.b1 && p.b2 != q.b2;
                if (disjoint) return false;
            }
    }
    return true;
}

}  // namespace tvl
