#include "crlab/instance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>

#include <fmt/format.h>

#include "crlab/errors.hpp"

namespace crlab {
namespace {

constexpr double kValidationTol = 1e-12;

void check_edges(const std::vector<GraphEdge>& edges, int from_limit, int to_limit,
                 const char* what) {
  std::set<ArmIndex> arms;
  for (const auto& e : edges) {
    if (e.from < 0 || e.from >= from_limit || e.to < 0 || e.to >= to_limit) {
      throw ParameterError(fmt::format("{} edge ({}, {}) has an endpoint out of range", what,
                                       e.from, e.to));
    }
    if (e.arm < 0) throw ParameterError(fmt::format("{} edge has negative arm index", what));
    if (!arms.insert(e.arm).second) {
      throw ParameterError(fmt::format("{}: arm {} is bound to more than one edge", what, e.arm + 1));
    }
  }
}

// Kahn's algorithm; returns an empty vector when the graph has a cycle.
std::vector<int> topological_order(const DagShortestPath& g) {
  std::vector<int> indegree(static_cast<std::size_t>(g.nodes), 0);
  std::vector<std::vector<int>> out(static_cast<std::size_t>(g.nodes));
  for (const auto& e : g.edges) {
    ++indegree[e.to];
    out[e.from].push_back(e.to);
  }
  std::queue<int> ready;
  for (int v = 0; v < g.nodes; ++v) {
    if (indegree[v] == 0) ready.push(v);
  }
  std::vector<int> order;
  while (!ready.empty()) {
    int v = ready.front();
    ready.pop();
    order.push_back(v);
    for (int w : out[v]) {
      if (--indegree[w] == 0) ready.push(w);
    }
  }
  if (static_cast<int>(order.size()) != g.nodes) return {};
  return order;
}

std::size_t longest_path_edges(const DagShortestPath& g, const std::vector<int>& order) {
  std::vector<long> depth(static_cast<std::size_t>(g.nodes), -1);
  depth[g.source] = 0;
  std::vector<std::vector<const GraphEdge*>> out(static_cast<std::size_t>(g.nodes));
  for (const auto& e : g.edges) out[e.from].push_back(&e);
  for (int v : order) {
    if (depth[v] < 0) continue;
    for (const auto* e : out[v]) depth[e->to] = std::max(depth[e->to], depth[v] + 1);
  }
  return depth[g.sink] < 0 ? 0 : static_cast<std::size_t>(depth[g.sink]);
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

const GraphEdge* edge_for_arm(const std::vector<GraphEdge>& edges, ArmIndex arm) {
  for (const auto& e : edges) {
    if (e.arm == arm) return &e;
  }
  return nullptr;
}

bool is_sorted_unique(const SuperArm& s) {
  return std::adjacent_find(s.begin(), s.end(), std::greater_equal<>()) == s.end();
}

}  // namespace

SuperArmFamily::SuperArmFamily(FamilyRepr repr, Sense sense) : repr_(std::move(repr)), sense_(sense) {
  std::size_t max_arm = 0;
  auto note_arm = [&](ArmIndex a) { max_arm = std::max(max_arm, static_cast<std::size_t>(a) + 1); };

  if (auto* ex = std::get_if<ExplicitSubsets>(&repr_)) {
    if (ex->subsets.empty()) throw ParameterError("explicit family has no super arms");
    for (auto& s : ex->subsets) {
      if (s.empty()) throw ParameterError("explicit family contains an empty super arm");
      std::sort(s.begin(), s.end());
      s.erase(std::unique(s.begin(), s.end()), s.end());
      if (s.front() < 0) throw ParameterError("explicit family references a negative arm");
      max_size_ = std::max(max_size_, s.size());
      note_arm(s.back());
    }
    std::sort(ex->subsets.begin(), ex->subsets.end());
    ex->subsets.erase(std::unique(ex->subsets.begin(), ex->subsets.end()), ex->subsets.end());
  } else if (auto* dag = std::get_if<DagShortestPath>(&repr_)) {
    if (dag->nodes < 2) throw ParameterError("shortest-path graph needs at least two nodes");
    check_edges(dag->edges, dag->nodes, dag->nodes, "shortest-path");
    if (dag->source < 0 || dag->source >= dag->nodes || dag->sink < 0 || dag->sink >= dag->nodes ||
        dag->source == dag->sink) {
      throw ParameterError("shortest-path graph needs distinct in-range source and sink");
    }
    auto order = topological_order(*dag);
    if (order.empty()) throw ParameterError("shortest-path graph contains a cycle");
    max_size_ = longest_path_edges(*dag, order);
    for (const auto& e : dag->edges) note_arm(e.arm);
  } else if (auto* tree = std::get_if<SpanningTree>(&repr_)) {
    if (tree->nodes < 1) throw ParameterError("spanning-tree graph needs at least one node");
    check_edges(tree->edges, tree->nodes, tree->nodes, "spanning-tree");
    for (const auto& e : tree->edges) {
      if (e.from == e.to) throw ParameterError("spanning-tree graph contains a self loop");
      note_arm(e.arm);
    }
    max_size_ = static_cast<std::size_t>(tree->nodes - 1);
  } else if (auto* bm = std::get_if<BipartiteMatching>(&repr_)) {
    if (bm->left < 1 || bm->right < 1) throw ParameterError("bipartite graph needs both sides");
    if (sense_ != Sense::Maximize) {
      throw ParameterError("bipartite matching families support the maximize sense only");
    }
    check_edges(bm->edges, bm->left, bm->right, "matching");
    for (const auto& e : bm->edges) note_arm(e.arm);
    max_size_ = static_cast<std::size_t>(std::min(bm->left, bm->right));
  }
  arms_referenced_ = max_arm;
}

bool SuperArmFamily::contains(const SuperArm& s) const {
  if (!is_sorted_unique(s)) return false;
  if (const auto* ex = std::get_if<ExplicitSubsets>(&repr_)) {
    return std::binary_search(ex->subsets.begin(), ex->subsets.end(), s);
  }
  if (const auto* dag = std::get_if<DagShortestPath>(&repr_)) {
    std::vector<const GraphEdge*> chosen;
    for (ArmIndex a : s) {
      const auto* e = edge_for_arm(dag->edges, a);
      if (!e) return false;
      chosen.push_back(e);
    }
    int at = dag->source;
    std::size_t used = 0;
    while (at != dag->sink) {
      const GraphEdge* next = nullptr;
      for (const auto* e : chosen) {
        if (e->from == at) {
          if (next) return false;
          next = e;
        }
      }
      if (!next) return false;
      at = next->to;
      ++used;
    }
    return used == chosen.size();
  }
  if (const auto* tree = std::get_if<SpanningTree>(&repr_)) {
    if (static_cast<int>(s.size()) != tree->nodes - 1) return false;
    UnionFind uf(tree->nodes);
    for (ArmIndex a : s) {
      const auto* e = edge_for_arm(tree->edges, a);
      if (!e || !uf.unite(e->from, e->to)) return false;
    }
    return true;
  }
  const auto& bm = std::get<BipartiteMatching>(repr_);
  std::vector<bool> left_used(static_cast<std::size_t>(bm.left)), right_used(static_cast<std::size_t>(bm.right));
  for (ArmIndex a : s) {
    const auto* e = edge_for_arm(bm.edges, a);
    if (!e || left_used[e->from] || right_used[e->to]) return false;
    left_used[e->from] = right_used[e->to] = true;
  }
  for (const auto& e : bm.edges) {
    if (!left_used[e.from] && !right_used[e.to]) return false;  // not maximal
  }
  return true;
}

std::string SuperArmFamily::kind() const {
  switch (repr_.index()) {
    case 0: return "explicit";
    case 1: return "dag_shortest_path";
    case 2: return "spanning_tree";
    default: return "bipartite_matching";
  }
}

ValidationReport validate_instance(const BanditInstance& inst) {
  ValidationReport report;
  auto add = [&](std::string kind, int arm, PullCount n, std::string detail) {
    report.violations.push_back({std::move(kind), arm, n, std::move(detail)});
  };

  if (inst.arms.empty()) add("instance", -1, 0, "instance has no arms (K >= 1 required)");
  if (inst.horizon < 1) add("instance", -1, 0, "horizon must be >= 1");
  if (!(inst.sigma >= 0.0) || !std::isfinite(inst.sigma)) add("instance", -1, 0, "sigma must be finite and >= 0");

  for (std::size_t i = 0; i < inst.arms.size(); ++i) {
    const auto& f = inst.arms[i];
    const int arm = static_cast<int>(i);
    if (f.horizon() < inst.horizon) {
      add("instance", arm, 0,
          fmt::format("arm defined up to {} pulls but horizon is {}", f.horizon(), inst.horizon));
      continue;
    }
    const PullCount T = inst.horizon;
    for (PullCount n = 1; n <= T; ++n) {
      double v = f.mu(n);
      if (v < -kValidationTol || v > 1.0 + kValidationTol) {
        report.in_range = false;
        add("range", arm, n, fmt::format("mu({}) = {} outside [0,1]", n, v));
      }
    }
    for (PullCount n = 1; n + 1 <= T; ++n) {
      if (f.mu(n + 1) < f.mu(n) - kValidationTol) {
        report.rising = false;
        add("rising", arm, n, fmt::format("gamma({}) < 0: mu({}) = {} < mu({}) = {}", n, n + 1, f.mu(n + 1), n, f.mu(n)));
      }
    }
    for (PullCount n = 1; n + 2 <= T; ++n) {
      if (f.gamma(n + 1) > f.gamma(n) + kValidationTol) {
        report.concave = false;
        if (inst.concave_certified) {
          add("concave", arm, n + 1,
              fmt::format("gamma({}) = {} > gamma({}) = {}", n + 1, f.gamma(n + 1), n, f.gamma(n)));
        }
      }
    }
  }

  if (inst.family.arms_referenced() > inst.arms.size()) {
    report.family_ok = false;
    add("family", -1, 0,
        fmt::format("family references arm {} but K = {}", inst.family.arms_referenced(), inst.arms.size()));
  }
  if (inst.family.max_size() == 0) {
    report.family_ok = false;
    add("family", -1, 0, "family has no feasible super arm of positive size");
  }
  if (inst.family.sense() == Sense::Minimize && inst.reward != RewardModel::Additive) {
    report.family_ok = false;
    add("family", -1, 0, "minimize sense requires additive rewards");
  }
  return report;
}

double super_arm_mean(const BanditInstance& inst, const SuperArm& s,
                      const std::vector<PullCount>& pull_counts_after) {
  double total = 0.0;
  double best = 0.0;
  bool first = true;
  for (ArmIndex a : s) {
    double v = inst.arms[a].mu(pull_counts_after[a]);
    total += v;
    best = first ? v : std::max(best, v);
    first = false;
  }
  return inst.reward == RewardModel::KMax ? best : total;
}

std::string format_super_arm(const SuperArm& s) {
  std::string out = "{";
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (k) out += ",";
    out += std::to_string(s[k] + 1);
  }
  return out + "}";
}

}  // namespace crlab
