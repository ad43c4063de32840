#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tvl/core.hpp"

namespace tvl {

// Triples (a, b, c) of a coloured bipartite graph; class C is [0, c_size).
struct TripartiteHypergraph {
    int a_size = 0, b_size = 0, c_size = 0;
    std::vector<std::array<int, 3>> triples;
};

// c_size < 0 means graph.colour_bound().
TripartiteHypergraph build_hypergraph(const ColouredBipartiteGraph& graph, int c_size = -1);
// Raw edge list version; throws PreconditionError unless proper and simple.
TripartiteHypergraph build_hypergraph(int a_size, int b_size, const std::vector<Edge>& edges, int c_size = -1);

struct TypicalityViolation {
    std::string projection;  // "AB", "BC" or "AC"
    std::string kind;        // "class_size", "degree" or "codegree"
    int u = -1, v = -1;      // class index for class_size, vertex ids otherwise
    double value = 0, lo = 0, hi = 0;
};

struct TypicalityReport {
    int n = 0;
    double p = 0, epsilon = 0;
    std::vector<TypicalityViolation> violations;
    bool typical() const { return violations.empty(); }
};

TypicalityReport check_typical(const TripartiteHypergraph& h, int n, double p, double epsilon);

// A packed structure: vertex set (flat ids), its colour set, and the two
// matchings that certify it.
struct Gadget {
    std::vector<int> vertices;
    std::vector<int> colours;
    std::vector<Edge> c0_edges;
    std::vector<Edge> rainbow;
};

// Empty if the c0 edges are a colour-c0 matching inside `vertices` and the
// rainbow edges form a matching whose colours are exactly `colours`, inside
// vertices plus `extra` (flat ids).
std::string gadget_problem(const ColouredBipartiteGraph& g, const Gadget& x, int c0, const std::vector<int>& extra = {});
// Empty if the gadgets are vertex-disjoint and, when asked, colour-disjoint
// apart from the colours in `shared`.
std::string family_problem(const std::vector<Gadget>& family, bool colour_disjoint, const std::vector<int>& shared = {});

enum class AuditMode { Exact, Greedy };

struct AuditOptions {
    AuditMode mode = AuditMode::Exact;
    int exact_cap = 12;            // exact P3 counting needs n <= cap
    std::array<bool, 7> enabled{true, true, true, true, true, true, true};
    int p6_samples = 10;           // random colour sets per (c0, k)
    int p7_samples = 30;
    std::uint64_t seed = 0;
    std::uint64_t search_budget = 200000;  // DFS nodes per gadget search
    int threads = 1;                       // properties run concurrently when > 1
};

struct PropertyResult {
    int id = 0;
    bool checked = false;
    bool passed = false;
    double quota = 0;              // families (or pairs for P3) needed
    std::uint64_t achieved = 0;    // smallest count over all instances
    std::uint64_t instances = 0;
    std::string worst;             // description of the weakest instance
    std::string note;
    // P3 only: most edges f below quota for one (c, e), and the allowance.
    std::uint64_t exceptions = 0;
    double allowance = 0;
    // Packed family for the weakest instance, with its context.
    std::vector<Gadget> witnesses;
    int witness_c0 = -1, witness_d = -1;
    std::vector<int> witness_extra;  // flat ids of u, v for P4
    bool witness_colour_disjoint = false;
};

struct PseudorandomAudit {
    int n = 0;
    double p = 0, epsilon = 0, alpha = 0;
    AuditMode mode = AuditMode::Exact;
    std::array<PropertyResult, 7> props;
    int p7_k = 0;
    bool p7_clipped = false;
    bool passed() const;  // every checked property passed
};

std::string to_string(AuditMode m);

PseudorandomAudit audit_pseudorandom(const ColouredBipartiteGraph& graph, int n, double p, double epsilon, double alpha,
                                     const AuditOptions& opts = {});

// Largest k <= 100 with k(k+1) <= colours - 1, so k+1 disjoint k-sets fit
// beside c0 (0 if none).
int p7_block_size(int colours);

}  // namespace tvl
