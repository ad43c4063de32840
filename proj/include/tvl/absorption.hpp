#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tvl/core.hpp"
#include "tvl/json_io.hpp"

namespace tvl {

// Fan-in of the asymptotic construction (template degree, targets per small
// absorber). Desk-scale runs use kDefaultFanIn.
inline constexpr int kAsymptoticFanIn = 100;
inline constexpr int kDefaultFanIn = 5;

// Exactly-C-rainbow perfect matching of G[vertices] (flat ids), or nullopt.
// Exhaustive; needs |colours| <= 64.
std::optional<std::vector<Edge>> exact_rainbow_cover(const ColouredBipartiteGraph& g, const std::vector<int>& vertices,
                                                     const std::vector<int>& colours);

// e,f-switcher: |V| = 2k-2, |C| = k, and G[V+V(e)], G[V+V(f)] both have an
// exactly-C-rainbow perfect matching. Order is k = |C|, so the direct
// construction has order 3.
struct EdgeSwitcher {
    std::vector<int> vertices;  // flat ids, sorted
    std::vector<int> colours;   // sorted
    Edge e, f;
    std::vector<Edge> cover_e, cover_f;  // found during construction
    bool patched = false;                // uses a colour switcher between the corner colours
    int order() const { return static_cast<int>(colours.size()); }
};

struct SwitcherSearch {
    std::vector<int> forbidden_vertices;  // flat ids
    std::vector<int> forbidden_colours;
    int max_order = 7;                    // 3 = direct only, 7 allows an order-4 colour switcher patch
    std::uint64_t seed = 0;
    std::uint64_t budget = 20000;         // nodes per colour-switcher search
};

// e and f: distinct, vertex-disjoint, same colour. Throws SearchExhausted
// ("edge_switcher") when nothing of order <= max_order avoids the sets.
EdgeSwitcher build_edge_switcher(const ColouredBipartiteGraph& g, const Edge& e, const Edge& f,
                                 const SwitcherSearch& search = {});

// Empty when s is valid in g (checked with exact_rainbow_cover).
std::string edge_switcher_problem(const ColouredBipartiteGraph& g, const EdgeSwitcher& s);

struct SwitchabilityReport {
    double beta = 0;
    int k = 0;
    std::size_t forbidden_size = 0;  // floor(beta |G|) vertices and colours per trial
    int trials = 0;
    int passes = 0;
    std::vector<int> orders;                 // per passing trial
    std::vector<std::string> certificates;   // per failing trial
    bool all_passed() const { return passes == trials; }
};

SwitchabilityReport verify_switchable(const ColouredBipartiteGraph& g, const Edge& e, const Edge& f, double beta, int k,
                                      int trials, std::uint64_t seed);

// E-absorber: |V| = 2k-2, |C| = k, and G[V+V(e)] has an exactly-C-rainbow
// perfect matching for every target e.
struct Absorber {
    std::vector<int> vertices;  // flat ids, sorted
    std::vector<int> colours;   // sorted
    std::vector<Edge> targets;
    std::vector<std::vector<Edge>> covers;  // covers[i] is the matching for targets[i]
    int order() const { return static_cast<int>(colours.size()); }
};

struct AbsorberOptions {
    std::vector<int> forbidden_vertices;  // flat ids
    std::vector<int> forbidden_colours;
    // true: a separate anchor edge wx with one switcher per target. false: the
    // first target's w1x1 doubles as the anchor, one switcher fewer.
    bool anchor = true;
    int max_switcher_order = 7;
    std::uint64_t seed = 0;
    std::uint64_t budget = 20000;
    int max_colour_pairs = 0;  // (d, d') pairs tried, 0 = all
};

// Targets: pairwise disjoint edges of one colour c0. Throws SearchExhausted
// with stage "absorber/cycles", "absorber/anchor" or "absorber/switchers".
Absorber build_absorber(const ColouredBipartiteGraph& g, const std::vector<Edge>& targets,
                        const AbsorberOptions& opts = {});

// Empty when the absorber invariant holds; every target is re-solved with
// exact_rainbow_cover, split over `threads`.
std::string absorber_problem(const ColouredBipartiteGraph& g, const Absorber& a, int threads = 1);

// Bipartite K with classes X = [0,h) and Y+Z, Y = [0, 2h/3), Z = [2h/3, 4h/3).
struct RobustTemplate {
    int h = 0;
    std::vector<std::vector<int>> adj;  // adj[x], sorted
    int attempts_used = 0;
    std::uint64_t subsets_checked = 0;
    int y_size() const { return 2 * h / 3; }
    int z_size() const { return 2 * h / 3; }
    int max_degree() const;
    std::size_t edge_count() const;
};

struct TemplateOptions {
    int degree = 4;        // random neighbours per x before pruning
    int attempts = 2000;
    bool prune = true;     // drop edges while the property still verifies
    int samples = 20;      // verified templates drawn; the sparsest is kept
    int cap = 15;          // largest h verified exhaustively
};

RobustTemplate build_template(int h, std::uint64_t seed, const TemplateOptions& opts = {});

// x -> matched node for X into Y + z0 (z0 as Z-node ids), or nullopt.
std::optional<std::vector<int>> template_matching(const RobustTemplate& k, const std::vector<int>& z0);
// Exhaustive over all Z0; empty when every one admits a perfect X-matching.
std::string template_problem(const RobustTemplate& k);

struct DistributiveOptions {
    std::vector<int> forbidden_vertices;
    std::vector<int> forbidden_colours;
    bool anchor = false;
    int max_switcher_order = 7;
    std::uint64_t seed = 0;
    int threads = 1;  // validation only
};

struct DistributiveAbsorber {
    std::vector<int> vertices;  // V_abs
    std::vector<int> colours;   // C_abs
    std::vector<Edge> targets;  // E
    int m0 = 0;
    std::vector<Edge> edges_y, edges_z;  // E_Y and E_Z (E inside E_Z)
    std::vector<int> z_node;             // Z node carrying edges_z[i]
    RobustTemplate templ;
    std::vector<Absorber> parts;         // parts[x] absorbs the edges on N_K(x)
    std::vector<std::vector<int>> part_edge;  // template node per parts[x].targets[i]

    // Exactly-C_abs-rainbow matching on V_abs + V(chosen); chosen is an m0-subset of targets.
    std::vector<Edge> absorb(const std::vector<Edge>& chosen) const;
};

DistributiveAbsorber distributive_absorber(const ColouredBipartiteGraph& g, const std::vector<Edge>& targets, int m0,
                                           const RobustTemplate& templ, const DistributiveOptions& opts = {});

// Checks the size identity, every part with absorber_problem, and absorb()
// on every m0-subset (at most `max_subsets`, 0 = all).
std::string distributive_problem(const ColouredBipartiteGraph& g, const DistributiveAbsorber& d, int threads = 1,
                                 std::size_t max_subsets = 0);

struct AdditionState {
    int c0 = 0;
    std::vector<Edge> m_id;  // colour-c0 matching
    std::vector<Edge> m_rb;  // rainbow, colour set C_add
    int rem_a = -1;          // remainder vertices, one per class
    int rem_b = -1;
};

std::string addition_state_problem(const ColouredBipartiteGraph& g, const AdditionState& s);

// Random state: m_id of id_edges colour-c0 edges and m_rb made of closed
// blocks, each `block` rainbow edges joined by `block` colour-c0 edges into
// an alternating cycle. rb_edges must be a multiple of block.
AdditionState init_addition_state(const ColouredBipartiteGraph& g, int c0, int id_edges, int rb_edges, int block,
                                  std::uint64_t seed, const std::vector<int>& forbidden_vertices = {});

struct AdditionOptions {
    std::uint64_t seed = 0;
    int max_block = 8;                  // longest alternating block accepted for F2
    std::uint64_t combos = 20000;       // F1 candidates tried
    std::uint64_t budget = 200000;      // DFS nodes per F3 search
};

struct AdditionStep {
    AdditionState next;
    std::vector<Edge> e1, f1, e2, f2, e3, f3;
};

// x in A and y in B, both outside the state. Throws SearchExhausted with
// stage "stage i", "stage ii" or "stage iii".
AdditionStep addition_step(const ColouredBipartiteGraph& g, const AdditionState& state, int x, int y,
                           const AdditionOptions& opts = {});

// Vertex ids are flat throughout.
Json to_json(const EdgeSwitcher& s);
Json to_json(const Absorber& a);
Json to_json(const RobustTemplate& k);
Json to_json(const DistributiveAbsorber& d);
Json to_json(const AdditionState& s);
Json to_json(const AdditionStep& s);
AdditionState addition_state_from_json(const Json& j);

}  // namespace tvl
