#include "tvl/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace tvl {

double round12(double x) {
    if (!std::isfinite(x)) return x;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return std::strtod(buf, nullptr);
}

Json to_json(const LatinArray& square) {
    Json cells = Json::array();
    for (int r = 0; r < square.order(); ++r) {
        Json row = Json::array();
        for (int c = 0; c < square.order(); ++c) {
            if (square.filled(r, c))
                row.push_back(square.at(r, c));
            else
                row.push_back(nullptr);
        }
        cells.push_back(row);
    }
    return Json{{"n", square.order()}, {"cells", cells}};
}

Json to_json(const std::vector<Edge>& edges) {
    Json arr = Json::array();
    for (const Edge& e : edges) arr.push_back(Json::array({e.a, e.b, e.colour}));
    return arr;
}

Json to_json(const ColouredBipartiteGraph& g) {
    return Json{{"a", g.a_size()}, {"b", g.b_size()}, {"edges", to_json(g.edges())}};
}

Json to_json(const Transversal& t) {
    Json arr = Json::array();
    for (auto [r, c] : t.cells) arr.push_back(Json::array({r, c}));
    return arr;
}

Json to_json(const ValidationReport& rep) {
    Json clashes = Json::array();
    for (auto& [e, f] : rep.colour_clashes) clashes.push_back(Json::array({to_json({e}), to_json({f})}));
    Json parallel = Json::array();
    for (auto& [e, f] : rep.parallel_edges) parallel.push_back(Json::array({to_json({e}), to_json({f})}));
    Json counts = Json::object();
    for (auto [c, k] : rep.colour_counts) counts[std::to_string(c)] = k;
    return Json{{"proper", rep.proper},
                {"simple", rep.simple},
                {"in_range", rep.in_range},
                {"colour_clashes", clashes},
                {"parallel_edges", parallel},
                {"colour_counts", counts},
                {"degrees_a", rep.degrees_a},
                {"degrees_b", rep.degrees_b}};
}

LatinArray latin_from_json(const Json& j) {
    require(j.contains("cells"), "LatinArray JSON needs a cells field");
    std::vector<std::vector<int>> rows;
    for (const auto& row : j.at("cells")) {
        std::vector<int> r;
        for (const auto& v : row) r.push_back(v.is_null() ? kEmpty : v.get<int>());
        rows.push_back(std::move(r));
    }
    if (j.contains("n")) require(j.at("n").get<int>() == static_cast<int>(rows.size()), "LatinArray JSON: n mismatch");
    return LatinArray(std::move(rows));
}

std::vector<Edge> edges_from_json(const Json& j) {
    std::vector<Edge> out;
    for (const auto& e : j) {
        require(e.is_array() && e.size() == 3, "edge JSON must be [a, b, colour]");
        out.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<int>()});
    }
    return out;
}

ColouredBipartiteGraph graph_from_json(const Json& j) {
    require(j.contains("a") && j.contains("b") && j.contains("edges"), "graph JSON needs a, b and edges");
    return ColouredBipartiteGraph(j.at("a").get<int>(), j.at("b").get<int>(), edges_from_json(j.at("edges")));
}

}  // namespace tvl
