#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "crlab/instance.hpp"

// Subset-scan reference for the structured families: every edge subset is
// tested against the structural predicate directly.
namespace reference {

using crlab::BipartiteMatching;
using crlab::DagShortestPath;
using crlab::GraphEdge;
using crlab::SpanningTree;
using crlab::SuperArm;

inline SuperArm subset_of(const std::vector<GraphEdge>& edges, unsigned mask) {
  SuperArm s;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    if (mask >> k & 1u) s.push_back(edges[k].arm);
  }
  std::sort(s.begin(), s.end());
  return s;
}

inline std::vector<const GraphEdge*> chosen(const std::vector<GraphEdge>& edges, unsigned mask) {
  std::vector<const GraphEdge*> out;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    if (mask >> k & 1u) out.push_back(&edges[k]);
  }
  return out;
}

inline bool is_path(const DagShortestPath& g, unsigned mask) {
  auto es = chosen(g.edges, mask);
  if (es.empty()) return false;
  int at = g.source;
  std::vector<bool> used(es.size(), false);
  for (std::size_t step = 0; step < es.size(); ++step) {
    int next = -1;
    for (std::size_t k = 0; k < es.size(); ++k) {
      if (!used[k] && es[k]->from == at) {
        if (next >= 0) return false;
        next = static_cast<int>(k);
      }
    }
    if (next < 0) return false;
    used[next] = true;
    at = es[next]->to;
  }
  return at == g.sink;
}

inline bool is_spanning_tree(const SpanningTree& g, unsigned mask) {
  auto es = chosen(g.edges, mask);
  if (static_cast<int>(es.size()) != g.nodes - 1) return false;
  std::vector<int> comp(g.nodes);
  std::iota(comp.begin(), comp.end(), 0);
  for (const auto* e : es) {
    int a = comp[e->from], b = comp[e->to];
    if (a == b) return false;
    for (int& c : comp) {
      if (c == b) c = a;
    }
  }
  return true;
}

inline bool is_maximal_matching(const BipartiteMatching& g, unsigned mask) {
  std::vector<bool> l(g.left, false), r(g.right, false);
  for (const auto* e : chosen(g.edges, mask)) {
    if (l[e->from] || r[e->to]) return false;
    l[e->from] = r[e->to] = true;
  }
  for (const auto& e : g.edges) {
    if (!l[e.from] && !r[e.to]) return false;
  }
  return true;
}

template <class Pred>
inline std::vector<SuperArm> brute_family(const std::vector<GraphEdge>& edges, Pred pred) {
  std::vector<SuperArm> out;
  for (unsigned mask = 0; mask < (1u << edges.size()); ++mask) {
    if (pred(mask)) out.push_back(subset_of(edges, mask));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace reference
