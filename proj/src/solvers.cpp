#include "crlab/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>

#include <fmt/format.h>

#include "crlab/errors.hpp"

namespace crlab {
namespace {

// Three-way comparison with a relative tolerance so that sums accumulated in
// different orders still tie.
int compare_values(double a, double b) {
  const double tol = 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
  if (a < b - tol) return -1;
  if (a > b + tol) return 1;
  return 0;
}

SuperArm with_arm(const SuperArm& s, ArmIndex arm) {
  SuperArm out;
  out.reserve(s.size() + 1);
  auto pos = std::lower_bound(s.begin(), s.end(), arm);
  out.insert(out.end(), s.begin(), pos);
  out.push_back(arm);
  out.insert(out.end(), pos, s.end());
  return out;
}

void check_weights(const SuperArmFamily& family, std::span<const double> weights) {
  if (weights.size() < family.arms_referenced()) {
    throw ParameterError(fmt::format("weight vector has {} entries but the family references {} arms",
                                     weights.size(), family.arms_referenced()));
  }
  for (double w : weights) {
    if (!std::isfinite(w)) throw ParameterError("solver weights must be finite");
  }
}

double minimize_cost(double w, const SolveOptions& options) {
  return 1.0 - std::clamp(w, 0.0, 1.0 + options.slack);
}

struct UnionFind {
  explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
  std::vector<int> parent;
};

// Gain in the ordered group R x Z^K: real value first, then a lexicographic
// key whose entry i counts arm i; larger keys favour smaller arm indices.
struct Gain {
  double value = 0.0;
  std::vector<int> key;

  bool better_than(const Gain& other) const {
    int c = compare_values(value, other.value);
    if (c != 0) return c > 0;
    for (std::size_t i = 0; i < key.size(); ++i) {
      if (key[i] != other.key[i]) return key[i] > other.key[i];
    }
    return false;
  }
  bool positive() const { return better_than(Gain{0.0, std::vector<int>(key.size(), 0)}); }
};

}  // namespace

bool tie_precedes(const SuperArm& a, const SuperArm& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia == *ib) {
      ++ia;
      ++ib;
    } else {
      return *ia < *ib;
    }
  }
  return ia != a.end();
}

SuperArm dag_shortest_path(const DagShortestPath& g, std::span<const double> costs) {
  std::vector<std::vector<const GraphEdge*>> out(static_cast<std::size_t>(g.nodes));
  std::vector<int> indegree(static_cast<std::size_t>(g.nodes), 0);
  for (const auto& e : g.edges) {
    if (static_cast<std::size_t>(e.arm) >= costs.size()) throw ParameterError("cost vector too short for graph");
    out[e.from].push_back(&e);
    ++indegree[e.to];
  }
  std::vector<int> order;
  for (int v = 0; v < g.nodes; ++v) {
    if (indegree[v] == 0) order.push_back(v);
  }
  for (std::size_t k = 0; k < order.size(); ++k) {
    for (const auto* e : out[order[k]]) {
      if (--indegree[e->to] == 0) order.push_back(e->to);
    }
  }
  if (static_cast<int>(order.size()) != g.nodes) throw ParameterError("shortest-path graph contains a cycle");

  // best[v]: cheapest v->sink suffix, ties by tie_precedes.
  struct Suffix {
    double cost;
    SuperArm arms;
  };
  std::vector<std::optional<Suffix>> best(static_cast<std::size_t>(g.nodes));
  best[g.sink] = Suffix{0.0, {}};
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int v = *it;
    if (v == g.sink) continue;
    for (const auto* e : out[v]) {
      if (!best[e->to]) continue;
      Suffix cand{costs[e->arm] + best[e->to]->cost, with_arm(best[e->to]->arms, e->arm)};
      if (!best[v]) {
        best[v] = std::move(cand);
        continue;
      }
      int c = compare_values(cand.cost, best[v]->cost);
      if (c < 0 || (c == 0 && tie_precedes(cand.arms, best[v]->arms))) best[v] = std::move(cand);
    }
  }
  if (!best[g.source]) throw InfeasibleError("no source->sink path in the shortest-path graph");
  return best[g.source]->arms;
}

SuperArm kruskal_mst(const SpanningTree& g, std::span<const double> costs) {
  std::vector<const GraphEdge*> edges;
  for (const auto& e : g.edges) {
    if (static_cast<std::size_t>(e.arm) >= costs.size()) throw ParameterError("cost vector too short for graph");
    edges.push_back(&e);
  }
  std::sort(edges.begin(), edges.end(), [&](const GraphEdge* a, const GraphEdge* b) {
    if (costs[a->arm] != costs[b->arm]) return costs[a->arm] < costs[b->arm];
    return a->arm < b->arm;
  });
  UnionFind uf(g.nodes);
  SuperArm tree;
  for (const auto* e : edges) {
    if (uf.unite(e->from, e->to)) tree.push_back(e->arm);
  }
  if (static_cast<int>(tree.size()) != g.nodes - 1) throw InfeasibleError("spanning-tree graph is disconnected");
  std::sort(tree.begin(), tree.end());
  return tree;
}

SuperArm max_weight_bipartite_matching(const BipartiteMatching& g, std::span<const double> weights) {
  std::size_t key_len = 0;
  for (const auto& e : g.edges) {
    if (static_cast<std::size_t>(e.arm) >= weights.size()) throw ParameterError("weight vector too short for graph");
    key_len = std::max(key_len, static_cast<std::size_t>(e.arm) + 1);
  }
  const int source = 0;
  const int sink = 1 + g.left + g.right;
  const int nodes = sink + 1;
  auto left_node = [&](int u) { return 1 + u; };
  auto right_node = [&](int v) { return 1 + g.left + v; };

  std::vector<int> match_left(static_cast<std::size_t>(g.left), -1);
  std::vector<int> match_right(static_cast<std::size_t>(g.right), -1);
  std::vector<bool> in_matching(g.edges.size(), false);

  struct Arc {
    int from;
    int to;
    int edge;  // -1 for source/sink arcs
    int sign;  // +1 adds the edge, -1 removes it
  };

  for (int round = 0; round < std::min(g.left, g.right); ++round) {
    std::vector<Arc> arcs;
    for (int u = 0; u < g.left; ++u) {
      if (match_left[u] < 0) arcs.push_back({source, left_node(u), -1, 0});
    }
    for (std::size_t k = 0; k < g.edges.size(); ++k) {
      const auto& e = g.edges[k];
      if (in_matching[k]) {
        arcs.push_back({right_node(e.to), left_node(e.from), static_cast<int>(k), -1});
      } else {
        arcs.push_back({left_node(e.from), right_node(e.to), static_cast<int>(k), +1});
      }
    }
    for (int v = 0; v < g.right; ++v) {
      if (match_right[v] < 0) arcs.push_back({right_node(v), sink, -1, 0});
    }

    // Bellman-Ford for the maximum-gain source->sink walk.
    std::vector<std::optional<Gain>> dist(static_cast<std::size_t>(nodes));
    std::vector<int> pred(static_cast<std::size_t>(nodes), -1);
    dist[source] = Gain{0.0, std::vector<int>(key_len, 0)};
    for (int pass = 0; pass < nodes; ++pass) {
      bool changed = false;
      for (std::size_t a = 0; a < arcs.size(); ++a) {
        const auto& arc = arcs[a];
        if (!dist[arc.from]) continue;
        Gain cand = *dist[arc.from];
        if (arc.edge >= 0) {
          const auto& e = g.edges[arc.edge];
          cand.value += arc.sign * std::max(0.0, weights[e.arm]);
          cand.key[e.arm] += arc.sign;
        }
        if (!dist[arc.to] || cand.better_than(*dist[arc.to])) {
          dist[arc.to] = std::move(cand);
          pred[arc.to] = static_cast<int>(a);
          changed = true;
        }
      }
      if (!changed) break;
    }
    if (!dist[sink] || !dist[sink]->positive()) break;

    std::vector<int> path;
    std::vector<bool> seen(static_cast<std::size_t>(nodes), false);
    bool broken = false;
    for (int at = sink; at != source;) {
      if (seen[at] || pred[at] < 0) {
        broken = true;
        break;
      }
      seen[at] = true;
      path.push_back(pred[at]);
      at = arcs[pred[at]].from;
    }
    if (broken) break;
    for (int a : path) {
      if (arcs[a].edge >= 0) in_matching[arcs[a].edge] = !in_matching[arcs[a].edge];
    }
    std::fill(match_left.begin(), match_left.end(), -1);
    std::fill(match_right.begin(), match_right.end(), -1);
    for (std::size_t k = 0; k < g.edges.size(); ++k) {
      if (!in_matching[k]) continue;
      match_left[g.edges[k].from] = static_cast<int>(k);
      match_right[g.edges[k].to] = static_cast<int>(k);
    }
  }

  // Rounding can stop the loop one zero-gain augmentation early.
  std::vector<std::size_t> by_arm(g.edges.size());
  std::iota(by_arm.begin(), by_arm.end(), std::size_t{0});
  std::sort(by_arm.begin(), by_arm.end(), [&](auto a, auto b) { return g.edges[a].arm < g.edges[b].arm; });
  for (std::size_t k : by_arm) {
    const auto& e = g.edges[k];
    if (in_matching[k] || match_left[e.from] >= 0 || match_right[e.to] >= 0) continue;
    in_matching[k] = true;
    match_left[e.from] = static_cast<int>(k);
    match_right[e.to] = static_cast<int>(k);
  }

  SuperArm out;
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    if (in_matching[k]) out.push_back(g.edges[k].arm);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double solver_objective(const SuperArmFamily& family, const SuperArm& s, std::span<const double> weights,
                        const SolveOptions& options) {
  double total = 0.0;
  for (ArmIndex a : s) {
    total += family.sense() == Sense::Minimize ? minimize_cost(weights[a], options) : weights[a];
  }
  return total;
}

SuperArm solve(const SuperArmFamily& family, std::span<const double> weights, const SolveOptions& options) {
  check_weights(family, weights);
  const bool minimize = family.sense() == Sense::Minimize;
  const auto& repr = family.repr();

  if (const auto* ex = std::get_if<ExplicitSubsets>(&repr)) {
    const SuperArm* best = nullptr;
    double best_value = 0.0;
    for (const auto& s : ex->subsets) {
      double v = solver_objective(family, s, weights, options);
      if (!best) {
        best = &s;
        best_value = v;
        continue;
      }
      int c = compare_values(v, best_value);
      if (minimize) c = -c;
      if (c > 0 || (c == 0 && tie_precedes(s, *best))) {
        best = &s;
        best_value = v;
      }
    }
    return *best;
  }

  std::vector<double> costs(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    costs[i] = minimize ? minimize_cost(weights[i], options) : -weights[i];
  }
  if (const auto* dag = std::get_if<DagShortestPath>(&repr)) return dag_shortest_path(*dag, costs);
  if (const auto* tree = std::get_if<SpanningTree>(&repr)) return kruskal_mst(*tree, costs);

  const auto& bm = std::get<BipartiteMatching>(repr);
  auto matching = max_weight_bipartite_matching(bm, weights);
  if (matching.empty()) throw InfeasibleError("bipartite graph has no edges to match");
  return matching;
}

std::vector<SuperArm> enumerate_super_arms(const SuperArmFamily& family, std::size_t cap) {
  if (cap < 1) throw ParameterError("enumeration cap must be >= 1");
  std::vector<SuperArm> found;
  auto record = [&](SuperArm s) {
    std::sort(s.begin(), s.end());
    found.push_back(std::move(s));
    if (found.size() > cap) throw EnumerationOverflow(found.size(), cap);
  };
  const auto& repr = family.repr();

  if (const auto* ex = std::get_if<ExplicitSubsets>(&repr)) {
    for (const auto& s : ex->subsets) record(s);
  } else if (const auto* dag = std::get_if<DagShortestPath>(&repr)) {
    std::vector<std::vector<const GraphEdge*>> out(static_cast<std::size_t>(dag->nodes));
    for (const auto& e : dag->edges) out[e.from].push_back(&e);
    SuperArm path;
    std::function<void(int)> walk = [&](int v) {
      if (v == dag->sink) {
        record(path);
        return;
      }
      for (const auto* e : out[v]) {
        path.push_back(e->arm);
        walk(e->to);
        path.pop_back();
      }
    };
    walk(dag->source);
  } else if (const auto* tree = std::get_if<SpanningTree>(&repr)) {
    std::vector<const GraphEdge*> edges;
    for (const auto& e : tree->edges) edges.push_back(&e);
    std::sort(edges.begin(), edges.end(), [](auto* a, auto* b) { return a->arm < b->arm; });
    const std::size_t need = static_cast<std::size_t>(tree->nodes - 1);
    SuperArm chosen;
    std::function<void(std::size_t, UnionFind)> pick = [&](std::size_t k, UnionFind uf) {
      if (chosen.size() == need) {
        record(chosen);
        return;
      }
      if (k == edges.size() || edges.size() - k < need - chosen.size()) return;
      UnionFind with = uf;
      if (with.unite(edges[k]->from, edges[k]->to)) {
        chosen.push_back(edges[k]->arm);
        pick(k + 1, with);
        chosen.pop_back();
      }
      pick(k + 1, std::move(uf));
    };
    pick(0, UnionFind(tree->nodes));
  } else {
    const auto& bm = std::get<BipartiteMatching>(repr);
    std::vector<bool> left_used(static_cast<std::size_t>(bm.left)), right_used(static_cast<std::size_t>(bm.right));
    SuperArm chosen;
    std::function<void(std::size_t)> pick = [&](std::size_t k) {
      if (k == bm.edges.size()) {
        for (const auto& e : bm.edges) {
          if (!left_used[e.from] && !right_used[e.to]) return;  // extendable
        }
        if (!chosen.empty()) record(chosen);
        return;
      }
      const auto& e = bm.edges[k];
      if (!left_used[e.from] && !right_used[e.to]) {
        left_used[e.from] = right_used[e.to] = true;
        chosen.push_back(e.arm);
        pick(k + 1);
        chosen.pop_back();
        left_used[e.from] = right_used[e.to] = false;
      }
      pick(k + 1);
    };
    pick(0);
  }
  std::sort(found.begin(), found.end());
  return found;
}

}  // namespace crlab
