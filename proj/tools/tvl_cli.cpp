#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "tvl/absorption.hpp"
#include "tvl/classes.hpp"
#include "tvl/constructions.hpp"
#include "tvl/errors.hpp"
#include "tvl/expander.hpp"
#include "tvl/json_io.hpp"
#include "tvl/pseudorandom.hpp"
#include "tvl/solvers.hpp"
#include "tvl/steiner.hpp"
#include "tvl/switchers.hpp"

using namespace tvl;

namespace {

using Table = std::vector<std::vector<std::string>>;

struct Output {
    Json json;
    Table csv;  // header first; empty means key,value rows from the json scalars
};

struct Globals {
    std::uint64_t seed = 0;
    int threads = 1;
    std::string format = "json";
    std::string out;
    bool pretty = false;
};

template <class T>
std::string str(const T& x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

std::string str(double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

std::string str(bool x) { return x ? "true" : "false"; }

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
}

std::string join(const std::vector<int>& v, const char* sep = " ") {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + std::to_string(v[i]);
    return s;
}

std::string render(const Output& o, const Globals& g) {
    if (g.format == "json") return (g.pretty ? o.json.dump(2) : o.json.dump()) + "\n";
    Table t = o.csv;
    if (t.empty()) {
        t.push_back({"key", "value"});
        for (auto it = o.json.begin(); it != o.json.end(); ++it)
            t.push_back({it.key(), it->is_string() ? it->get<std::string>() : it->dump()});
    }
    std::string s;
    for (const auto& row : t) {
        for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + csv_cell(row[i]);
        s += "\n";
    }
    return s;
}

Json read_json(const std::string& path) {
    std::ifstream f(path);
    require(f.good(), "cannot read " + path);
    try {
        return Json::parse(f);
    } catch (const Json::parse_error& e) {
        throw PreconditionError(path + ": " + e.what());
    }
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    return out;
}

int to_int(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        int v = std::stoi(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw PreconditionError("bad integer in " + what + ": '" + s + "'");
}

double to_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw PreconditionError("bad number in " + what + ": '" + s + "'");
}

std::vector<int> factors(const std::string& s) {
    std::vector<int> f;
    for (const auto& p : split(s, 'x')) f.push_back(to_int(p, "group factors"));
    return f;
}

std::pair<int, int> colour_pair(const std::string& s) {
    auto p = split(s, ',');
    require(p.size() == 2, "expected c,d");
    return {to_int(p[0], "pair"), to_int(p[1], "pair")};
}

// Latin square or graph source shared by the graph-based subcommands.
struct Input {
    std::string family = "cyclic";
    int n = 0;
    std::string in;

    void add(CLI::App* sc) {
        sc->add_option("--family", family, "cyclic | abelian:<f1>x<f2>.. | maillet:<m>:<factors>[:<seed>] | "
                                           "random:<seed>:<burnin>");
        sc->add_option("--n", n, "order for cyclic and random families");
        sc->add_option("--in", in, "Latin square or graph JSON file");
    }

    // Square when the source is one; graph always.
    std::pair<std::optional<LatinArray>, ColouredBipartiteGraph> load() const {
        if (!in.empty()) {
            Json j = read_json(in);
            if (j.contains("cells")) {
                LatinArray L = latin_from_json(j);
                return {L, latin_to_graph(L)};
            }
            return {std::nullopt, graph_from_json(j)};
        }
        LatinArray L = square();
        return {L, latin_to_graph(L)};
    }

    LatinArray square() const {
        auto parts = split(family, ':');
        require(!parts.empty(), "empty family");
        const std::string& kind = parts[0];
        if (kind == "cyclic") {
            require(parts.size() == 1, "cyclic takes no parameters; use --n");
            require(n >= 1, "cyclic needs --n >= 1");
            return group_table(FiniteAbelianGroup::cyclic(n));
        }
        if (kind == "abelian") {
            require(parts.size() == 2, "abelian:<f1>x<f2>...");
            return group_table(FiniteAbelianGroup(factors(parts[1])));
        }
        if (kind == "maillet") {
            require(parts.size() == 3 || parts.size() == 4, "maillet:<m>:<factors>[:<seed>]");
            MailletSpec spec;
            spec.block_size = to_int(parts[1], "maillet block size");
            spec.base_group = FiniteAbelianGroup(factors(parts[2]));
            if (parts.size() == 4)
                spec.inner_colourings = random_inner_blocks(spec.base_group, spec.block_size,
                                                            static_cast<std::uint64_t>(to_int(parts[3], "seed")));
            return maillet_blowup(spec);
        }
        if (kind == "random") {
            require(parts.size() == 3, "random:<seed>:<burnin>");
            require(n >= 1, "random needs --n >= 1");
            return random_latin_square(n, static_cast<std::uint64_t>(to_int(parts[1], "seed")),
                                       to_int(parts[2], "burn-in"));
        }
        throw PreconditionError("unknown family '" + family + "'");
    }
};

Json edges_json(const std::vector<Edge>& e) { return to_json(e); }

Json switcher_json(const ColouredBipartiteGraph& g, const ColourSwitcher& s) {
    return Json{{"from", s.switch_from},
                {"to", s.switch_to},
                {"order", s.order()},
                {"m1", edges_json(s.m1.edges)},
                {"m2", edges_json(s.m2.edges)},
                {"vertices", switcher_vertices(g, s)}};
}

// gen

Output cmd_gen(const Input& in) {
    LatinArray L = in.square();
    Output o{to_json(L), {}};
    for (int r = 0; r < L.order(); ++r) {
        std::vector<std::string> row;
        for (int c = 0; c < L.order(); ++c) row.push_back(L.filled(r, c) ? std::to_string(L.at(r, c)) : "");
        o.csv.push_back(row);
    }
    return o;
}

// solve

struct SolveArgs {
    bool exact = false, nibble = false, augment = false, witness = false;
    std::uint64_t budget = 0;
    double bite = 0.1;
    int rounds = 2000;
};

Output cmd_solve(const Input& in, const SolveArgs& a, const Globals& g) {
    auto [square, graph] = in.load();
    RainbowMatching m;
    bool optimal = false;
    std::uint64_t nodes = 0;
    if (a.nibble || a.augment) {
        m = greedy_nibble_matching(graph, a.bite, g.seed);
        if (a.augment) m = local_switch_augment(graph, m, a.rounds, g.seed);
    } else {
        ExactOptions eo;
        eo.budget = a.budget;
        eo.threads = g.threads;
        auto r = max_rainbow_matching_exact(graph, eo);
        m = r.witness;
        optimal = r.optimal;
        nodes = r.nodes;
    }
    Output o;
    o.json["size"] = m.size();
    o.json["optimal"] = optimal;
    if (a.witness) {
        o.json["nodes"] = nodes;
        o.json["matching"] = edges_json(m.edges);
        if (square) o.json["cells"] = to_json(matching_to_transversal(m, *square));
    }
    o.csv = {{"size", "optimal"}, {str(m.size()), str(optimal)}};
    return o;
}

// switchers

Output cmd_switchers(const Input& in, const std::string& pair, bool matrix, bool bounds, const Globals& g) {
    auto graph = in.load().second;
    Output o;
    if (!pair.empty()) {
        auto [c, d] = colour_pair(pair);
        auto all = enumerate_switchers4(graph, c, d);
        Json list = Json::array();
        for (const auto& s : all) list.push_back(switcher_json(graph, s));
        o.json = Json{{"c", c}, {"d", d}, {"count", all.size()}, {"switchers", list}};
        o.csv = {{"c", "d", "w_cd"}, {str(c), str(d), str(all.size())}};
    } else if (bounds) {
        auto r = check_count_bounds(graph);
        Json keys = Json::array();
        o.csv = {{"key", "max_count", "bound", "max_ratio", "violations"}};
        for (int i = 0; i < 5; ++i) {
            keys.push_back(Json{{"key", i + 1},
                                {"max_count", r.max_count[i]},
                                {"bound", round12(r.bound[i])},
                                {"max_ratio", round12(r.max_ratio[i])},
                                {"violations", r.violations[i]}});
            o.csv.push_back({str(i + 1), str(r.max_count[i]), str(r.bound[i]), str(r.max_ratio[i]),
                             str(r.violations[i])});
        }
        o.json = Json{{"n", r.n},
                      {"switchers", r.switchers},
                      {"null_switchers", r.null_switchers},
                      {"ok", r.ok()},
                      {"keys", keys}};
    } else {
        (void)matrix;  // the default view
        auto w = weight_matrix(graph, g.threads);
        Json rows = Json::array();
        o.csv = {{"c", "d", "w_cd"}};
        for (const auto& [c, d, x] : w.nonzero()) {
            rows.push_back(Json::array({c, d, x}));
            o.csv.push_back({str(c), str(d), str(x)});
        }
        o.json = Json{{"colour_bound", w.colour_bound},
                      {"total", w.total()},
                      {"null_switchers", w.null_switchers},
                      {"symmetric", w.symmetric()},
                      {"weights", rows}};
    }
    return o;
}

// classes

struct ClassesArgs {
    std::optional<double> w0, w1, w2;
    bool quantiles = false;
    int bands = 0;
    int cap = 0;
    double alpha = 0;
    std::string test_pair;
    int trials = 20;
    double epsilon = 0.05, eta = 0.1;
    int L = 0, ell = 4;
};

Json exchange_json(const ExchangeReport& r) {
    Json trials = Json::array();
    for (const auto& t : r.trials) {
        Json j{{"passed", t.passed},
               {"forbidden_vertices", t.forbidden_vertices},
               {"forbidden_colours", t.forbidden_colours}};
        if (t.witness) j["order"] = t.witness->order();
        if (!t.certificate.empty()) j["certificate"] = t.certificate;
        trials.push_back(j);
    }
    return Json{{"c", r.c},
                {"d", r.d},
                {"epsilon", round12(r.params.epsilon)},
                {"L", r.params.L},
                {"ell", r.params.ell},
                {"forbidden_size", r.forbidden_size},
                {"passes", r.passes},
                {"all_passed", r.all_passed()},
                {"trials", trials}};
}

Output cmd_classes(const Input& in, const ClassesArgs& a, const Globals& g) {
    auto graph = in.load().second;
    Output o;
    if (!a.test_pair.empty()) {
        auto [c, d] = colour_pair(a.test_pair);
        ExchangeParams p;
        p.epsilon = a.epsilon;
        p.eta = a.eta;
        p.L = a.L;
        p.ell = a.ell;
        auto r = test_pair_exchangeable(graph, c, d, p, a.trials, g.seed);
        o.json = exchange_json(r);
        o.csv = {{"trial", "passed", "order", "certificate"}};
        for (std::size_t i = 0; i < r.trials.size(); ++i) {
            const auto& t = r.trials[i];
            o.csv.push_back({str(i), str(t.passed), t.witness ? str(t.witness->order()) : "", t.certificate});
        }
        return o;
    }
    ClassifierConfig cfg;
    if (!a.quantiles) {
        cfg.w0 = a.w0;
        cfg.w1 = a.w1;
        cfg.w2 = a.w2;
    }
    cfg.band_count = a.bands;
    cfg.multiplicity_cap = a.cap;
    cfg.alpha = a.alpha;
    cfg.seed = g.seed;
    auto fam = classify_colours(weight_matrix(graph, g.threads), cfg, graph);
    Json classes = Json::array();
    o.csv = {{"kind", "band", "size", "colours", "d_input", "d_expander", "min_degree"}};
    for (const auto& c : fam.classes) {
        const char* kind = c.kind == ColourClass::Heavy ? "heavy" : "band";
        Json j{{"kind", kind}, {"colours", c.colours}};
        if (c.kind == ColourClass::Band)
            j.update(Json{{"band", c.band},
                          {"d_input", round12(c.d_input)},
                          {"d_expander", round12(c.d_expander)},
                          {"min_degree", c.min_degree},
                          {"steps", c.steps},
                          {"stop_mode", to_string(c.stop_mode)}});
        classes.push_back(j);
        o.csv.push_back({kind, str(c.band), str(c.colours.size()), join(c.colours), str(c.d_input),
                         str(c.d_expander), str(c.min_degree)});
    }
    std::vector<double> edges;
    for (double x : fam.band_edges) edges.push_back(round12(x));
    o.json = Json{{"w0", round12(fam.w0)},
                  {"w1", round12(fam.w1)},
                  {"w2", round12(fam.w2)},
                  {"band_edges", edges},
                  {"total_weight", round12(fam.total_weight)},
                  {"uncovered_weight", round12(fam.uncovered_weight)},
                  {"multiplicity_cap", fam.multiplicity_cap},
                  {"over_cap", fam.over_cap},
                  {"pairs",
                   {{"heavy", fam.heavy_pairs},
                    {"moderate", fam.moderate_pairs},
                    {"light", fam.light_pairs},
                    {"very_light", fam.very_light_pairs}}},
                  {"classes", classes}};
    return o;
}

// expander

struct ExpanderArgs {
    std::string graph = "er:50:0.3";
    std::string in;
    bool extract = false, verify = false;
    std::string mode = "exact";
    double alpha = 0, delta = 0;
    int samples = 2000;
};

SimpleGraph simple_graph(const ExpanderArgs& a, std::uint64_t seed) {
    if (!a.in.empty()) {
        Json j = read_json(a.in);
        require(j.contains("n") && j.contains("edges"), "graph JSON needs n and edges");
        std::vector<std::pair<int, int>> e;
        for (const auto& p : j.at("edges")) e.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
        return SimpleGraph(j.at("n").get<int>(), e);
    }
    auto p = split(a.graph, ':');
    require(p.size() >= 2, "graph spec is <kind>:<size>[:<p>]");
    int n = to_int(p[1], "graph size");
    if (p[0] == "er") {
        require(p.size() == 3, "er:<n>:<p>");
        return SimpleGraph::erdos_renyi(n, to_double(p[2], "edge probability"), seed);
    }
    require(p.size() == 2, "unexpected parameter in graph spec");
    if (p[0] == "complete") return SimpleGraph::complete(n);
    if (p[0] == "cycle") return SimpleGraph::cycle(n);
    if (p[0] == "path") return SimpleGraph::path(n);
    if (p[0] == "hypercube") return SimpleGraph::hypercube(n);
    if (p[0] == "barbell") return SimpleGraph::barbell(n);
    throw PreconditionError("unknown graph kind '" + p[0] + "'");
}

Output cmd_expander(const ExpanderArgs& a, const Globals& g) {
    SimpleGraph graph = simple_graph(a, g.seed);
    Output o;
    if (a.verify) {
        require(a.mode == "exact" || a.mode == "heuristic", "--mode is exact or heuristic");
        ExpanderParams p;
        p.alpha = a.alpha > 0 ? a.alpha : default_alpha(graph.vertex_count());
        p.delta_cap = a.delta;
        auto r = verify_expansion(graph, p, a.mode == "exact" ? SearchMode::Exact : SearchMode::Heuristic, g.seed,
                                  a.samples);
        o.json = Json{{"n", graph.vertex_count()},
                      {"alpha", round12(p.alpha)},
                      {"delta", round12(p.delta_cap)},
                      {"mode", to_string(r.mode)},
                      {"passed", r.passed},
                      {"subsets_checked", r.subsets_checked}};
        if (!r.passed)
            o.json["witness"] = Json{{"u", r.witness_u}, {"killed", r.killed}, {"neighbourhood", r.neighbourhood}};
        return o;
    }
    auto r = extract_expander(graph, a.alpha, g.seed);
    Json trace = Json::array();
    o.csv = {{"step", "kind", "n_before", "n_after", "d_before", "d_after", "min_degree_before", "u_size", "n_size",
              "mode"}};
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
        const auto& s = r.trace[i];
        trace.push_back(Json{{"kind", to_string(s.kind)},
                             {"n_before", s.n_before},
                             {"n_after", s.n_after},
                             {"d_before", round12(s.d_before)},
                             {"d_after", round12(s.d_after)},
                             {"min_degree_before", s.min_degree_before},
                             {"u_size", s.u_size},
                             {"n_size", s.n_size},
                             {"mode", to_string(s.mode)}});
        o.csv.push_back({str(i), to_string(s.kind), str(s.n_before), str(s.n_after), str(s.d_before),
                         str(s.d_after), str(s.min_degree_before), str(s.u_size), str(s.n_size),
                         to_string(s.mode)});
    }
    o.json = Json{{"n", graph.vertex_count()},
                  {"edges", graph.edge_count()},
                  {"d", round12(graph.average_degree())},
                  {"alpha", round12(r.params.alpha)},
                  {"delta", round12(r.params.delta_cap)},
                  {"h",
                   {{"n", r.h.vertex_count()},
                    {"edges", r.h.edge_count()},
                    {"d", round12(r.h.average_degree())},
                    {"min_degree", r.h.min_degree()},
                    {"labels", r.h.labels()}}},
                  {"stop_mode", to_string(r.stop_mode)},
                  {"trace", trace}};
    return o;
}

// audit

struct AuditArgs {
    int n = 0;
    double p = 1.0, epsilon = 0.5, alpha = 1e-4;
    std::string properties = "1-7";
    std::string mode = "exact";
};

std::array<bool, 7> property_mask(const std::string& s) {
    std::array<bool, 7> on{};
    for (const auto& part : split(s, ',')) {
        auto r = split(part, '-');
        require(r.size() == 1 || r.size() == 2, "properties look like 1-7 or 1,3,5");
        int lo = to_int(r[0], "properties"), hi = r.size() == 2 ? to_int(r[1], "properties") : lo;
        require(1 <= lo && lo <= hi && hi <= 7, "properties range within 1-7");
        for (int i = lo; i <= hi; ++i) on[i - 1] = true;
    }
    return on;
}

Output cmd_audit(const Input& in, const AuditArgs& a, const Globals& g) {
    auto graph = in.load().second;
    require(a.mode == "exact" || a.mode == "greedy", "--mode is exact or greedy");
    AuditOptions opts;
    opts.mode = a.mode == "exact" ? AuditMode::Exact : AuditMode::Greedy;
    opts.enabled = property_mask(a.properties);
    opts.seed = g.seed;
    opts.threads = g.threads;
    const int n = a.n > 0 ? a.n : graph.a_size();
    auto r = audit_pseudorandom(graph, n, a.p, a.epsilon, a.alpha, opts);
    Output o;
    Json props = Json::array();
    o.csv = {{"property", "checked", "passed", "quota", "achieved", "instances", "worst", "note"}};
    for (const auto& p : r.props) {
        props.push_back(Json{{"id", p.id},
                             {"checked", p.checked},
                             {"passed", p.passed},
                             {"quota", round12(p.quota)},
                             {"achieved", p.achieved},
                             {"instances", p.instances},
                             {"worst", p.worst},
                             {"note", p.note},
                             {"exceptions", p.exceptions},
                             {"allowance", round12(p.allowance)},
                             {"witnesses", p.witnesses.size()}});
        o.csv.push_back({"P" + str(p.id), str(p.checked), str(p.passed), str(p.quota), str(p.achieved),
                         str(p.instances), p.worst, p.note});
    }
    o.json = Json{{"n", r.n},
                  {"p", round12(r.p)},
                  {"epsilon", round12(r.epsilon)},
                  {"alpha", round12(r.alpha)},
                  {"mode", to_string(r.mode)},
                  {"passed", r.passed()},
                  {"p7_k", r.p7_k},
                  {"p7_clipped", r.p7_clipped},
                  {"properties", props}};
    return o;
}

// absorb

struct AbsorbArgs {
    int targets = kDefaultFanIn;
    bool demo = false;
    int colour = 0;
    bool anchorless = false;
    int max_order = 7;
    int m0 = 0;
    int h = 9;
};

Output cmd_absorb(Input in, const AbsorbArgs& a, const Globals& g) {
    if (a.demo && in.in.empty() && in.n == 0) in.n = a.m0 > 0 ? 67 : 31;
    auto graph = in.load().second;
    require(a.targets >= 1, "--targets must be positive");
    const auto& cls = graph.colour_class(a.colour);
    require(static_cast<int>(cls.size()) >= a.targets, "colour " + str(a.colour) + " has fewer edges than --targets");
    std::vector<Edge> tg(cls.begin(), cls.begin() + a.targets);
    Output o;
    if (a.m0 > 0) {
        auto templ = build_template(a.h, g.seed);
        DistributiveOptions opts;
        opts.seed = g.seed;
        opts.threads = g.threads;
        opts.max_switcher_order = a.max_order;
        auto d = distributive_absorber(graph, tg, a.m0, templ, opts);
        std::string problem = distributive_problem(graph, d, g.threads);
        o.json = to_json(d);
        o.json["valid"] = problem.empty();
        if (!problem.empty()) o.json["problem"] = problem;
        o.csv = {{"vertices", "colours", "targets", "m0", "valid"},
                 {str(d.vertices.size()), str(d.colours.size()), str(d.targets.size()), str(d.m0),
                  str(problem.empty())}};
        return o;
    }
    AbsorberOptions opts;
    opts.anchor = !a.anchorless;
    opts.max_switcher_order = a.max_order;
    opts.seed = g.seed;
    auto ab = build_absorber(graph, tg, opts);
    std::string problem = absorber_problem(graph, ab, g.threads);
    o.json = to_json(ab);
    o.json["order"] = ab.order();
    o.json["valid"] = problem.empty();
    if (!problem.empty()) o.json["problem"] = problem;
    o.csv = {{"vertices", "colours", "targets", "order", "valid"},
             {str(ab.vertices.size()), str(ab.colours.size()), str(ab.targets.size()), str(ab.order()),
              str(problem.empty())}};
    return o;
}

// template

Output cmd_template(int h, int degree, int samples, const Globals& g) {
    TemplateOptions opts;
    opts.degree = degree;
    opts.samples = samples;
    auto k = build_template(h, g.seed, opts);
    std::string problem = template_problem(k);
    Output o{to_json(k), {}};
    o.json["valid"] = problem.empty();
    if (!problem.empty()) o.json["problem"] = problem;
    o.csv = {{"x", "neighbours"}};
    for (int x = 0; x < k.h; ++x) o.csv.push_back({str(x), join(k.adj[x])});
    return o;
}

// addstep

struct AddArgs {
    std::string pairs;
    bool demo = false;
    int steps = 5;
    int c0 = 0, id_edges = 20, rb_edges = 60, block = 2;
};

std::set<int> state_vertices(const ColouredBipartiteGraph& g, const AdditionState& s) {
    std::set<int> v;
    for (const auto* m : {&s.m_id, &s.m_rb})
        for (const Edge& e : *m) v.insert(e.a), v.insert(flat_b(g, e.b));
    v.insert(s.rem_a);
    v.insert(flat_b(g, s.rem_b));
    return v;
}

std::pair<int, int> fresh_pair(const ColouredBipartiteGraph& g, const AdditionState& s, std::mt19937_64& rng) {
    auto used = state_vertices(g, s);
    std::vector<int> as, bs;
    for (int a = 0; a < g.a_size(); ++a)
        if (!used.count(a)) as.push_back(a);
    for (int b = 0; b < g.b_size(); ++b)
        if (!used.count(flat_b(g, b))) bs.push_back(b);
    require(!as.empty() && !bs.empty(), "no vertices left outside the state");
    return {as[rng() % as.size()], bs[rng() % bs.size()]};
}

Output cmd_addstep(Input in, const AddArgs& a, const Globals& g) {
    Json spec = a.pairs.empty() ? Json::object() : read_json(a.pairs);
    if (a.demo && in.in.empty() && in.n == 0) in.n = 101;
    ColouredBipartiteGraph graph = spec.contains("graph") ? graph_from_json(spec["graph"]) : in.load().second;
    AdditionState s = spec.contains("state")
                          ? addition_state_from_json(spec["state"])
                          : init_addition_state(graph, a.c0, a.id_edges, a.rb_edges, a.block, g.seed);
    std::string problem = addition_state_problem(graph, s);
    require(problem.empty(), "addition state: " + problem);
    std::vector<std::pair<int, int>> pairs;
    if (spec.contains("pairs")) {
        for (const auto& p : spec["pairs"]) {
            require(p.is_array() && p.size() == 2, "pairs are [x, y] with x in A and y in B");
            pairs.emplace_back(p[0].get<int>(), p[1].get<int>());
        }
    } else {
        require(a.demo, "addstep needs --pairs file.json or --demo");
    }
    std::vector<int> colours0;
    for (const Edge& e : s.m_rb) colours0.push_back(e.colour);
    std::sort(colours0.begin(), colours0.end());

    Output o;
    o.json["initial"] = to_json(s);
    Json steps = Json::array();
    o.csv = {{"step", "x", "y", "m_id", "m_rb", "E1", "F1", "E2", "F2", "E3", "F3", "balanced"}};
    std::mt19937_64 rng(g.seed);
    const int count = pairs.empty() ? a.steps : static_cast<int>(pairs.size());
    for (int i = 0; i < count; ++i) {
        auto [x, y] = pairs.empty() ? fresh_pair(graph, s, rng) : pairs[i];
        AdditionOptions opts;
        opts.seed = g.seed + static_cast<std::uint64_t>(i);
        auto before = state_vertices(graph, s);
        auto r = addition_step(graph, s, x, y, opts);
        // ledger: two vertices in, one more c0 edge, rainbow colours unchanged
        auto after = state_vertices(graph, r.next);
        before.insert(x);
        before.insert(flat_b(graph, y));
        std::vector<int> cols;
        for (const Edge& e : r.next.m_rb) cols.push_back(e.colour);
        std::sort(cols.begin(), cols.end());
        bool balanced = after == before && cols == colours0 && r.next.m_id.size() == s.m_id.size() + 1 &&
                        addition_state_problem(graph, r.next).empty();
        Json j = to_json(r);
        j["pair"] = {x, y};
        j["balanced"] = balanced;
        steps.push_back(j);
        o.csv.push_back({str(i), str(x), str(y), str(r.next.m_id.size()), str(r.next.m_rb.size()), str(r.e1.size()),
                         str(r.f1.size()), str(r.e2.size()), str(r.f2.size()), str(r.e3.size()), str(r.f3.size()),
                         str(balanced)});
        require(balanced, "addition step " + str(i) + " broke the ledger");
        s = r.next;
    }
    o.json["steps"] = steps;
    o.json["final"] = to_json(s);
    return o;
}

// sts

struct StsArgs {
    std::string construct;
    int m = 5;
    std::string in;
    bool reduce = false, balanced = false, brouwer = false;
    int seeds = 50;
    int exact_cap = 12;
};

Json sts_json(const TripleSystem& s) { return Json{{"n", s.n}, {"triples", s.triples}}; }

Output cmd_sts(const StsArgs& a, const Globals& g) {
    TripleSystem s;
    if (!a.in.empty()) {
        Json j = read_json(a.in);
        require(j.contains("n") && j.contains("triples"), "STS JSON needs n and triples");
        s.n = j["n"].get<int>();
        for (const auto& t : j["triples"]) {
            require(t.is_array() && t.size() == 3, "triples are [a, b, c]");
            Triple x{t[0].get<int>(), t[1].get<int>(), t[2].get<int>()};
            std::sort(x.begin(), x.end());
            s.triples.push_back(x);
        }
        std::string problem = sts_problem(s);
        require(problem.empty(), "not a Steiner triple system: " + problem);
    } else {
        require(a.construct.empty() || a.construct == "bose", "only --construct bose is available");
        s = bose_sts(a.m);
    }
    Output o;
    if (a.reduce) {
        auto r = tripartition_reduce(s, g.seed, a.balanced);
        o.json = Json{{"n", s.n},
                      {"seed", g.seed},
                      {"deleted_point", r.deleted_point},
                      {"attempts", r.attempts},
                      {"balanced", r.balanced},
                      {"part_a", r.part_a},
                      {"part_b", r.part_b},
                      {"part_c", r.part_c},
                      {"graph", to_json(r.graph)}};
        return o;
    }
    if (a.brouwer) {
        BrouwerOptions opts;
        opts.exact_cap = a.exact_cap;
        opts.threads = g.threads;
        auto r = brouwer_pipeline(s, a.seeds, opts);
        o.json = Json{{"n", s.n},
                      {"target", r.target},
                      {"best", r.best.size()},
                      {"achieved", r.achieved},
                      {"best_seed", r.best_seed},
                      {"seeds_run", r.seeds_run},
                      {"matching", r.best},
                      {"size_per_seed", r.size_per_seed}};
        o.csv = {{"seed", "size", "exact"}};
        for (int i = 0; i < r.seeds_run; ++i)
            o.csv.push_back({str(i), str(r.size_per_seed[i]), str(static_cast<bool>(r.exact_per_seed[i]))});
        return o;
    }
    o.json = sts_json(s);
    o.csv = {{"a", "b", "c"}};
    for (const auto& t : s.triples) o.csv.push_back({str(t[0]), str(t[1]), str(t[2])});
    return o;
}

// report

Output cmd_report(int from, int to, const Globals& g) {
    require(1 <= from && from <= to, "need 1 <= --from <= --to");
    require(to <= kCountTransversalCap, "--to is capped at " + str(kCountTransversalCap));
    Output o;
    Json rows = Json::array();
    o.csv = {{"n", "max_transversal", "optimal", "full_transversals", "complete_mapping", "hall_paige",
              "property_p"}};
    for (int n = from; n <= to; ++n) {
        auto grp = FiniteAbelianGroup::cyclic(n);
        auto L = group_table(grp);
        auto graph = latin_to_graph(L);
        ExactOptions eo;
        eo.threads = g.threads;
        auto r = max_rainbow_matching_exact(graph, eo);
        auto full = count_full_transversals(L);
        bool cm = complete_mapping_exists(grp).exists;
        bool hp = grp.sylow2_trivial_or_noncyclic();
        bool pp = has_property_p(graph);
        rows.push_back(Json{{"n", n},
                            {"max_transversal", r.size},
                            {"optimal", r.optimal},
                            {"full_transversals", full},
                            {"complete_mapping", cm},
                            {"hall_paige", hp},
                            {"property_p", pp}});
        o.csv.push_back({str(n), str(r.size), str(r.optimal), str(full), str(cm), str(hp), str(pp)});
    }
    o.json = Json{{"family", "cyclic"}, {"rows", rows}};
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Transversals and rainbow matchings toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "random seed")->envname("TVL_SEED");
    app.add_option("--threads", g.threads, "worker threads (1 = deterministic single-thread)")
        ->check(CLI::PositiveNumber);
    app.add_option("--format", g.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--out", g.out, "write to this path instead of stdout");
    app.add_flag("--pretty", g.pretty, "indented JSON");

    std::function<Output()> run;

    Input gen_in;
    auto* gen = app.add_subcommand("gen", "emit a Latin square");
    gen_in.add(gen);
    gen->callback([&] { run = [&] { return cmd_gen(gen_in); }; });

    Input solve_in;
    SolveArgs sa;
    auto* solve = app.add_subcommand("solve", "largest rainbow matching / transversal");
    solve_in.add(solve);
    auto* f_exact = solve->add_flag("--exact", sa.exact, "exact branch and bound (default)");
    auto* f_nibble = solve->add_flag("--nibble", sa.nibble, "greedy nibble heuristic");
    auto* f_aug = solve->add_flag("--augment", sa.augment, "nibble then local switching");
    f_exact->excludes(f_nibble)->excludes(f_aug);
    f_nibble->excludes(f_aug);
    solve->add_option("--budget", sa.budget, "exact node budget, 0 = none");
    solve->add_option("--bite", sa.bite, "nibble bite fraction");
    solve->add_option("--rounds", sa.rounds, "augment rounds");
    solve->add_flag("--witness", sa.witness, "include the matching");
    solve->callback([&] { run = [&] { return cmd_solve(solve_in, sa, g); }; });

    Input sw_in;
    std::string sw_pair;
    bool sw_matrix = false, sw_bounds = false;
    auto* sw = app.add_subcommand("switchers", "order-4 colour switchers");
    sw_in.add(sw);
    auto* o_pair = sw->add_option("--pair", sw_pair, "c,d: list the c,d-switchers");
    auto* o_matrix = sw->add_flag("--matrix", sw_matrix, "weight matrix (default)");
    auto* o_bounds = sw->add_flag("--bounds", sw_bounds, "check the five count bounds");
    o_pair->excludes(o_matrix)->excludes(o_bounds);
    o_matrix->excludes(o_bounds);
    sw->callback([&] { run = [&] { return cmd_switchers(sw_in, sw_pair, sw_matrix, sw_bounds, g); }; });

    Input cl_in;
    ClassesArgs ca;
    auto* cl = app.add_subcommand("classes", "colour classes and exchange tests");
    cl_in.add(cl);
    cl->add_option("--w0", ca.w0);
    cl->add_option("--w1", ca.w1);
    cl->add_option("--w2", ca.w2);
    cl->add_flag("--quantiles", ca.quantiles, "thresholds from the weight quantiles");
    cl->add_option("--bands", ca.bands);
    cl->add_option("--cap", ca.cap, "multiplicity cap, 0 = default");
    cl->add_option("--alpha", ca.alpha, "expander alpha override");
    cl->add_option("--test-pair", ca.test_pair, "c,d: run the exchange test instead");
    cl->add_option("--trials", ca.trials);
    cl->add_option("--epsilon", ca.epsilon);
    cl->add_option("--eta", ca.eta);
    cl->add_option("--L", ca.L);
    cl->add_option("--ell", ca.ell);
    cl->callback([&] { run = [&] { return cmd_classes(cl_in, ca, g); }; });

    ExpanderArgs ea;
    auto* ex = app.add_subcommand("expander", "expander extraction and verification");
    ex->add_option("--graph", ea.graph, "er:<n>:<p> | complete:<n> | cycle:<n> | path:<n> | hypercube:<d> | barbell:<k>");
    ex->add_option("--in", ea.in, "graph JSON {n, edges}");
    auto* f_ext = ex->add_flag("--extract", ea.extract, "run the extraction (default)");
    auto* f_ver = ex->add_flag("--verify", ea.verify, "check expansion of the graph itself");
    f_ext->excludes(f_ver);
    ex->add_option("--mode", ea.mode)->check(CLI::IsMember({"exact", "heuristic"}));
    ex->add_option("--alpha", ea.alpha, "0 = default");
    ex->add_option("--delta", ea.delta);
    ex->add_option("--samples", ea.samples);
    ex->callback([&] { run = [&] { return cmd_expander(ea, g); }; });

    Input au_in;
    AuditArgs aa;
    auto* au = app.add_subcommand("audit", "pseudorandomness audit");
    au_in.add(au);
    au->add_option("--size", aa.n, "n for the audit, 0 = |A|");
    au->add_option("--p", aa.p);
    au->add_option("--epsilon", aa.epsilon);
    au->add_option("--alpha", aa.alpha);
    au->add_option("--properties", aa.properties, "e.g. 1-7 or 1,3");
    au->add_option("--mode", aa.mode)->check(CLI::IsMember({"exact", "greedy"}));
    au->callback([&] { run = [&] { return cmd_audit(au_in, aa, g); }; });

    Input ab_in;
    AbsorbArgs ba;
    auto* ab = app.add_subcommand("absorb", "build and check an absorber");
    ab->set_help_flag("--help", "Print this help message and exit");  // frees -h for --h
    ab_in.add(ab);
    ab->add_option("--targets", ba.targets, "edges of the target colour to absorb");
    ab->add_flag("--demo", ba.demo, "cyclic host of order 31 (67 with --m0) unless given");
    ab->add_option("--colour", ba.colour, "target colour");
    ab->add_flag("--anchorless", ba.anchorless);
    ab->add_option("--max-order", ba.max_order, "largest edge-switcher order");
    ab->add_option("--m0", ba.m0, "distributive absorber absorbing any m0 of the targets");
    ab->add_option("--h", ba.h, "template size for --m0");
    ab->callback([&] { run = [&] { return cmd_absorb(ab_in, ba, g); }; });

    int th = 9, tdeg = 4, tsamples = 20;
    auto* tp = app.add_subcommand("template", "robustly matchable template");
    tp->set_help_flag("--help", "Print this help message and exit");
    tp->add_option("--h", th)->required();
    tp->add_option("--degree", tdeg);
    tp->add_option("--samples", tsamples);
    tp->callback([&] { run = [&] { return cmd_template(th, tdeg, tsamples, g); }; });

    Input ad_in;
    AddArgs da;
    auto* ad = app.add_subcommand("addstep", "vertex addition steps");
    ad_in.add(ad);
    ad->add_option("--pairs", da.pairs, "JSON with pairs, optional graph and state");
    ad->add_flag("--demo", da.demo, "random pairs on a cyclic host of order 101 unless given");
    ad->add_option("--steps", da.steps, "steps for --demo");
    ad->add_option("--c0", da.c0);
    ad->add_option("--id-edges", da.id_edges);
    ad->add_option("--rb-edges", da.rb_edges);
    ad->add_option("--block", da.block);
    ad->callback([&] { run = [&] { return cmd_addstep(ad_in, da, g); }; });

    StsArgs st;
    auto* sts = app.add_subcommand("sts", "Steiner triple systems");
    sts->add_option("--construct", st.construct, "bose");
    sts->add_option("--m", st.m, "Bose parameter, order 3m");
    sts->add_option("--in", st.in, "STS JSON {n, triples}");
    auto* f_red = sts->add_flag("--reduce", st.reduce, "random tripartition reduction");
    sts->add_flag("--balanced", st.balanced, "resample until the parts are equal");
    auto* f_br = sts->add_flag("--brouwer", st.brouwer, "matching pipeline over seeds");
    f_red->excludes(f_br);
    sts->add_option("--seeds", st.seeds);
    sts->add_option("--exact-cap", st.exact_cap);
    sts->callback([&] { run = [&] { return cmd_sts(st, g); }; });

    int rfrom = 1, rto = 9;
    auto* rep = app.add_subcommand("report", "summary table over cyclic tables");
    rep->add_option("--from", rfrom);
    rep->add_option("--to", rto);
    rep->callback([&] { run = [&] { return cmd_report(rfrom, rto, g); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 64;
    }

    try {
        std::string text = render(run(), g);
        if (g.out.empty()) {
            std::cout << text;
        } else {
            std::ofstream f(g.out);
            require(f.good(), "cannot write " + g.out);
            f << text;
        }
    } catch (const PreconditionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const SearchExhausted& e) {
        std::cerr << "search exhausted at " << e.what() << "\n";
        return 2;
    } catch (const Json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
