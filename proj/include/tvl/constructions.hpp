#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tvl/core.hpp"

namespace tvl {

using GroupElement = std::vector<int>;

// Direct product of cyclic groups Z_{f_1} x ... x Z_{f_k}. No factors = trivial group.
class FiniteAbelianGroup {
public:
    FiniteAbelianGroup() = default;
    explicit FiniteAbelianGroup(std::vector<int> invariant_factors);
    static FiniteAbelianGroup cyclic(int n);

    const std::vector<int>& invariant_factors() const { return factors_; }
    int order() const { return order_; }
    // Mixed radix with the last factor varying fastest.
    GroupElement element(int index) const;
    int index(const GroupElement& g) const;
    GroupElement add(const GroupElement& x, const GroupElement& y) const;
    GroupElement scale(const GroupElement& x, int m) const;
    GroupElement identity() const { return GroupElement(factors_.size(), 0); }
    int add_index(int i, int j) const { return table_[static_cast<std::size_t>(i) * order_ + j]; }
    // True when the Sylow 2-subgroup is trivial or non-cyclic, i.e. fewer or
    // more than exactly one even invariant factor.
    bool sylow2_trivial_or_noncyclic() const;

private:
    std::vector<int> factors_;
    int order_ = 1;
    std::vector<int> table_;
};

// All invariant-factor decompositions of abelian groups of order n.
std::vector<FiniteAbelianGroup> abelian_groups_of_order(int n);

LatinArray group_table(const FiniteAbelianGroup& group);

struct MailletSpec {
    FiniteAbelianGroup base_group;
    int block_size = 1;
    // Indexed v * h + w; empty means cyclic-shift blocks.
    std::vector<LatinArray> inner_colourings;
};

LatinArray maillet_blowup(const MailletSpec& spec);
// h*h random inner blocks of order m, one per (v, w).
std::vector<LatinArray> random_inner_blocks(const FiniteAbelianGroup& group, int m, std::uint64_t seed);
GroupElement group_sum_obstruction(const FiniteAbelianGroup& group, int m);

LatinArray random_latin_square(int n, std::uint64_t seed, int burn_in);

struct CompleteMappingResult {
    bool exists = false;
    std::optional<Transversal> witness;
    std::size_t states_explored = 0;
};

inline constexpr int kCompleteMappingCap = 16;
CompleteMappingResult complete_mapping_exists(const FiniteAbelianGroup& group, int cap = kCompleteMappingCap);

// Exhaustive decision of full-transversal existence on any Latin array of
// order <= 16 (layered subset DP). Used by complete_mapping_exists.
CompleteMappingResult full_transversal_exists(const LatinArray& square, bool fix_first_row = false);

// Property P check: for all pairs of vertex-disjoint length-3 paths with the
// same colour pattern, the closing edges share a colour.
bool has_property_p(const ColouredBipartiteGraph& g);

// Every Latin square of order n (n <= 5), in lexicographic order of cells.
template <class F>
void for_each_latin_square(int n, F&& fn);

}  // namespace tvl

#include "tvl/detail/enumerate_squares.hpp"
