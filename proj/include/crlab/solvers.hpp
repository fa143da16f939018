#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "crlab/instance.hpp"

namespace crlab {

struct SolveOptions {
  /// Minimize-sense weights are clamped to [0, 1 + slack] before the
  /// cost = 1 - weight transform. Policies that use weights above 1 (optimistic
  /// indices, forced-exploration weights) raise the slack.
  double slack = 0.0;
};

/// Tie order on super arms: `a` precedes `b` when the smallest index in their
/// symmetric difference belongs to `a`. For equal-size sets this is the
/// lexicographic order of the sorted index sequences.
bool tie_precedes(const SuperArm& a, const SuperArm& b);

/// Best super arm for per-base-arm weights: argmax sum w_i (Maximize) or
/// argmin sum (1 - w_i) (Minimize). Ties resolve by `tie_precedes`.
/// Throws InfeasibleError when the family admits no super arm.
SuperArm solve(const SuperArmFamily& family, std::span<const double> weights, const SolveOptions& options = {});

/// The quantity `solve` optimises, for a given super arm.
double solver_objective(const SuperArmFamily& family, const SuperArm& s, std::span<const double> weights,
                        const SolveOptions& options = {});

/// Minimum-cost source->sink path by dynamic programming over a topological
/// order. Costs are indexed by arm; negative costs are allowed (the graph is
/// acyclic). Throws InfeasibleError when the sink is unreachable.
SuperArm dag_shortest_path(const DagShortestPath& graph, std::span<const double> costs);

/// Minimum-cost spanning tree (Kruskal, ties by arm index).
/// Throws InfeasibleError when the graph is disconnected.
SuperArm kruskal_mst(const SpanningTree& graph, std::span<const double> costs);

/// Maximum-weight matching by successive maximum-gain augmenting paths.
/// Negative weights are treated as zero; the result is a maximal matching.
SuperArm max_weight_bipartite_matching(const BipartiteMatching& graph, std::span<const double> weights);

/// Every super arm of the family, sorted. Throws EnumerationOverflow when more
/// than `cap` exist.
std::vector<SuperArm> enumerate_super_arms(const SuperArmFamily& family, std::size_t cap);

}  // namespace crlab
