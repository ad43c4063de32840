#pragma once

#include <json.hpp>

#include "tvl/core.hpp"

namespace tvl {

using Json = nlohmann::ordered_json;

// Rounds to 12 significant digits so reruns emit byte-identical text.
double round12(double x);

Json to_json(const LatinArray& square);
Json to_json(const ColouredBipartiteGraph& g);
Json to_json(const std::vector<Edge>& edges);
Json to_json(const Transversal& t);
Json to_json(const ValidationReport& rep);

LatinArray latin_from_json(const Json& j);
ColouredBipartiteGraph graph_from_json(const Json& j);
std::vector<Edge> edges_from_json(const Json& j);

}  // namespace tvl
