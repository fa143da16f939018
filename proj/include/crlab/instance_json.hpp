#pragma once

#include <initializer_list>
#include <string>

#include <json.hpp>

#include "crlab/instance.hpp"

namespace crlab {

using Json = nlohmann::ordered_json;

/// Parses an instance document:
///
///   { "name", "horizon", "sigma", "sense": "maximize"|"minimize",
///     "reward": "additive"|"kmax", "concave_certified",
///     "arms": [ {"type": "constant"|"ramp"|"power_law"|"tabulated", ...} ],
///     "family": {"kind": "explicit"|"dag_shortest_path"|"spanning_tree"|
///                        "bipartite_matching", ...},
///     "metadata": {string: string} }
///
/// Arm indices are 1-based in JSON, graph nodes 0-based. Unknown keys are
/// rejected. Errors are ConfigError carrying the JSON path under `path`.
BanditInstance instance_from_json(const Json& doc, const std::string& path = "instance");

Json instance_to_json(const BanditInstance& inst);

/// Throws ConfigError naming the first key of `obj` outside `allowed`.
void reject_unknown_keys(const Json& obj, std::initializer_list<const char*> allowed,
                         const std::string& path);

}  // namespace crlab
