#include "crlab/instance_json.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "crlab/errors.hpp"

namespace crlab {
namespace {

template <class T>
T get_field(const Json& obj, const char* key, const std::string& path) {
  if (!obj.contains(key)) throw ConfigError(path + "." + key, "missing required field");
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(path + "." + key, "has the wrong type");
  }
}

template <class T>
T get_or(const Json& obj, const char* key, T fallback, const std::string& path) {
  return obj.contains(key) ? get_field<T>(obj, key, path) : fallback;
}

void require_object(const Json& obj, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
}

RisingFunction arm_from_json(const Json& j, PullCount horizon, const std::string& path) {
  require_object(j, path);
  const auto type = get_field<std::string>(j, "type", path);
  try {
    if (type == "constant") {
      reject_unknown_keys(j, {"type", "value"}, path);
      return RisingFunction(Constant{get_field<double>(j, "value", path)}, horizon);
    }
    if (type == "ramp") {
      reject_unknown_keys(j, {"type", "slope", "kink", "plateau"}, path);
      const double slope = get_field<double>(j, "slope", path);
      const double plateau = get_field<double>(j, "plateau", path);
      if (!j.contains("kink")) return RisingFunction::saturating_ramp(slope, plateau, horizon);
      return RisingFunction(PiecewiseLinearSaturating{slope, get_field<PullCount>(j, "kink", path), plateau},
                            horizon);
    }
    if (type == "power_law") {
      reject_unknown_keys(j, {"type", "base", "amplitude", "exponent", "shift", "cap_pull"}, path);
      PowerLawSaturating p;
      p.base = get_or<double>(j, "base", 0.0, path);
      p.amplitude = get_field<double>(j, "amplitude", path);
      p.exponent = get_field<double>(j, "exponent", path);
      p.shift = get_or<int>(j, "shift", 0, path);
      if (j.contains("cap_pull")) p.cap_pull = get_field<PullCount>(j, "cap_pull", path);
      return RisingFunction(p, horizon);
    }
    if (type == "tabulated") {
      reject_unknown_keys(j, {"type", "values"}, path);
      auto values = get_field<std::vector<double>>(j, "values", path);
      const auto n = static_cast<PullCount>(values.size());
      return RisingFunction(Tabulated{std::move(values)}, n);
    }
  } catch (const ParameterError& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(path + ".type", fmt::format("unknown arm type '{}'", type));
}

std::vector<GraphEdge> edges_from_json(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of edges");
  std::vector<GraphEdge> edges;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string p = fmt::format("{}[{}]", path, k);
    require_object(j[k], p);
    reject_unknown_keys(j[k], {"from", "to", "arm"}, p);
    const int arm = get_field<int>(j[k], "arm", p);
    if (arm < 1) throw ConfigError(p + ".arm", "arm indices are 1-based");
    edges.push_back({get_field<int>(j[k], "from", p), get_field<int>(j[k], "to", p), arm - 1});
  }
  return edges;
}

Json edges_to_json(const std::vector<GraphEdge>& edges) {
  Json out = Json::array();
  for (const auto& e : edges) out.push_back({{"from", e.from}, {"to", e.to}, {"arm", e.arm + 1}});
  return out;
}

SuperArmFamily family_from_json(const Json& j, Sense sense, const std::string& path) {
  require_object(j, path);
  const auto kind = get_field<std::string>(j, "kind", path);
  try {
    if (kind == "explicit") {
      reject_unknown_keys(j, {"kind", "subsets"}, path);
      auto raw = get_field<std::vector<std::vector<int>>>(j, "subsets", path);
      std::vector<SuperArm> subsets;
      for (auto& s : raw) {
        SuperArm arm;
        for (int a : s) {
          if (a < 1) throw ConfigError(path + ".subsets", "arm indices are 1-based");
          arm.push_back(a - 1);
        }
        subsets.push_back(std::move(arm));
      }
      return SuperArmFamily(ExplicitSubsets{std::move(subsets)}, sense);
    }
    if (kind == "dag_shortest_path") {
      reject_unknown_keys(j, {"kind", "nodes", "edges", "source", "sink"}, path);
      DagShortestPath g;
      g.nodes = get_field<int>(j, "nodes", path);
      g.source = get_field<int>(j, "source", path);
      g.sink = get_field<int>(j, "sink", path);
      g.edges = edges_from_json(j.at("edges"), path + ".edges");
      return SuperArmFamily(std::move(g), sense);
    }
    if (kind == "spanning_tree") {
      reject_unknown_keys(j, {"kind", "nodes", "edges"}, path);
      SpanningTree g;
      g.nodes = get_field<int>(j, "nodes", path);
      g.edges = edges_from_json(j.at("edges"), path + ".edges");
      return SuperArmFamily(std::move(g), sense);
    }
    if (kind == "bipartite_matching") {
      reject_unknown_keys(j, {"kind", "left", "right", "edges"}, path);
      BipartiteMatching g;
      g.left = get_field<int>(j, "left", path);
      g.right = get_field<int>(j, "right", path);
      g.edges = edges_from_json(j.at("edges"), path + ".edges");
      return SuperArmFamily(std::move(g), sense);
    }
  } catch (const ParameterError& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(path + ".kind", fmt::format("unknown family kind '{}'", kind));
}

Json arm_to_json(const RisingFunction& f) {
  const auto& shape = f.shape();
  if (const auto* c = std::get_if<Constant>(&shape)) return {{"type", "constant"}, {"value", c->value}};
  if (const auto* r = std::get_if<PiecewiseLinearSaturating>(&shape)) {
    return {{"type", "ramp"}, {"slope", r->slope}, {"kink", r->kink}, {"plateau", r->plateau}};
  }
  if (const auto* p = std::get_if<PowerLawSaturating>(&shape)) {
    Json j = {{"type", "power_law"}, {"base", p->base},     {"amplitude", p->amplitude},
              {"exponent", p->exponent}, {"shift", p->shift}};
    if (p->cap_pull) j["cap_pull"] = *p->cap_pull;
    return j;
  }
  const auto& t = std::get<Tabulated>(shape);
  return {{"type", "tabulated"}, {"values", t.values}};
}

}  // namespace

void reject_unknown_keys(const Json& obj, std::initializer_list<const char*> allowed,
                         const std::string& path) {
  for (const auto& [key, value] : obj.items()) {
    bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!known) throw ConfigError(path + "." + key, "unknown key");
  }
}

BanditInstance instance_from_json(const Json& doc, const std::string& path) {
  require_object(doc, path);
  reject_unknown_keys(doc, {"name", "horizon", "sigma", "sense", "reward", "concave_certified", "arms", "family",
                            "metadata"},
                      path);
  BanditInstance inst;
  inst.name = get_or<std::string>(doc, "name", "instance", path);
  inst.horizon = get_field<PullCount>(doc, "horizon", path);
  if (inst.horizon < 1) throw ConfigError(path + ".horizon", "must be >= 1");
  inst.sigma = get_or<double>(doc, "sigma", 0.0, path);
  inst.concave_certified = get_or<bool>(doc, "concave_certified", false, path);

  const auto sense = get_or<std::string>(doc, "sense", "maximize", path);
  if (sense != "maximize" && sense != "minimize") throw ConfigError(path + ".sense", "expected maximize|minimize");
  const auto reward = get_or<std::string>(doc, "reward", "additive", path);
  if (reward != "additive" && reward != "kmax") throw ConfigError(path + ".reward", "expected additive|kmax");
  inst.reward = reward == "kmax" ? RewardModel::KMax : RewardModel::Additive;

  if (!doc.contains("arms") || !doc.at("arms").is_array()) throw ConfigError(path + ".arms", "expected an array");
  const auto& arms = doc.at("arms");
  for (std::size_t k = 0; k < arms.size(); ++k) {
    inst.arms.push_back(arm_from_json(arms[k], inst.horizon, fmt::format("{}.arms[{}]", path, k)));
  }
  if (!doc.contains("family")) throw ConfigError(path + ".family", "missing required field");
  inst.family = family_from_json(doc.at("family"), sense == "minimize" ? Sense::Minimize : Sense::Maximize,
                                 path + ".family");
  if (doc.contains("metadata")) {
    inst.metadata = get_field<std::map<std::string, std::string>>(doc, "metadata", path);
  }
  return inst;
}

Json instance_to_json(const BanditInstance& inst) {
  Json doc;
  doc["name"] = inst.name;
  doc["horizon"] = inst.horizon;
  doc["sigma"] = inst.sigma;
  doc["sense"] = inst.family.sense() == Sense::Minimize ? "minimize" : "maximize";
  doc["reward"] = inst.reward == RewardModel::KMax ? "kmax" : "additive";
  doc["concave_certified"] = inst.concave_certified;
  doc["arms"] = Json::array();
  for (const auto& f : inst.arms) doc["arms"].push_back(arm_to_json(f));

  const auto& repr = inst.family.repr();
  Json fam;
  if (const auto* ex = std::get_if<ExplicitSubsets>(&repr)) {
    fam["kind"] = "explicit";
    fam["subsets"] = Json::array();
    for (const auto& s : ex->subsets) {
      Json row = Json::array();
      for (ArmIndex a : s) row.push_back(a + 1);
      fam["subsets"].push_back(row);
    }
  } else if (const auto* g = std::get_if<DagShortestPath>(&repr)) {
    fam = {{"kind", "dag_shortest_path"}, {"nodes", g->nodes}, {"source", g->source}, {"sink", g->sink},
           {"edges", edges_to_json(g->edges)}};
  } else if (const auto* t = std::get_if<SpanningTree>(&repr)) {
    fam = {{"kind", "spanning_tree"}, {"nodes", t->nodes}, {"edges", edges_to_json(t->edges)}};
  } else {
    const auto& b = std::get<BipartiteMatching>(repr);
    fam = {{"kind", "bipartite_matching"}, {"left", b.left}, {"right", b.right}, {"edges", edges_to_json(b.edges)}};
  }
  doc["family"] = fam;
  doc["metadata"] = inst.metadata;
  return doc;
}

}  // namespace crlab
