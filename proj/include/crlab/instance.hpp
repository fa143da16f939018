#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "crlab/rising_function.hpp"

namespace crlab {

using ArmIndex = int;

/// A feasible combination of base arms: sorted, duplicate-free, 0-based.
using SuperArm = std::vector<ArmIndex>;

enum class Sense { Maximize, Minimize };

/// How member outcomes combine into the super-arm reward. KMax exists only to
/// exhibit instances where a constant policy is not optimal.
enum class RewardModel { Additive, KMax };

struct GraphEdge {
  int from = 0;
  int to = 0;
  ArmIndex arm = 0;
};

struct ExplicitSubsets {
  std::vector<SuperArm> subsets;
};

/// Directed acyclic graph; super arms are source->sink paths.
struct DagShortestPath {
  int nodes = 0;
  std::vector<GraphEdge> edges;
  int source = 0;
  int sink = 0;
};

/// Undirected graph; super arms are spanning trees.
struct SpanningTree {
  int nodes = 0;
  std::vector<GraphEdge> edges;
};

/// Bipartite graph with `from` in [0, left) and `to` in [0, right); super arms
/// are maximal matchings.
struct BipartiteMatching {
  int left = 0;
  int right = 0;
  std::vector<GraphEdge> edges;
};

using FamilyRepr = std::variant<ExplicitSubsets, DagShortestPath, SpanningTree, BipartiteMatching>;

class SuperArmFamily {
 public:
  /// Normalises explicit subsets (sorts, deduplicates) and computes L.
  /// Throws ParameterError for structurally malformed input.
  SuperArmFamily(FamilyRepr repr, Sense sense);

  const FamilyRepr& repr() const { return repr_; }
  Sense sense() const { return sense_; }

  /// Maximal super-arm size (exact for explicit lists, a valid upper bound for
  /// graph tasks).
  std::size_t max_size() const { return max_size_; }

  /// Largest base-arm index referenced plus one.
  std::size_t arms_referenced() const { return arms_referenced_; }

  /// Structural membership test (path / spanning tree / maximal matching /
  /// listed subset).
  bool contains(const SuperArm& s) const;

  std::string kind() const;

 private:
  FamilyRepr repr_;
  Sense sense_;
  std::size_t max_size_ = 0;
  std::size_t arms_referenced_ = 0;
};

struct BanditInstance {
  std::string name = "instance";
  std::vector<RisingFunction> arms;
  double sigma = 0.0;
  PullCount horizon = 1;
  SuperArmFamily family{ExplicitSubsets{{{0}}}, Sense::Maximize};
  bool concave_certified = false;
  RewardModel reward = RewardModel::Additive;
  /// Free-form provenance, e.g. rounded breakpoints of generated instances.
  std::map<std::string, std::string> metadata;

  std::size_t num_arms() const { return arms.size(); }
};

struct Violation {
  std::string kind;  // "range", "rising", "concave", "family", "instance"
  int arm = -1;      // 0-based, -1 when not arm-specific
  PullCount n = 0;   // offending pull index (range) or increment index gamma(n), 0 if n/a
  std::string detail;
};

struct ValidationReport {
  bool rising = true;
  bool concave = true;  // observed, regardless of certification
  bool in_range = true;
  bool family_ok = true;
  std::vector<Violation> violations;

  bool valid() const { return violations.empty(); }
};

/// Checks every arm for the rising property and [0,1] range, concavity when
/// the instance is certified concave, and family/instance invariants. Never
/// throws for invalid content; every violated index is listed.
ValidationReport validate_instance(const BanditInstance& inst);

/// Reward of pulling `s` once more when the members are at the given pull
/// counts, under the instance's reward model.
double super_arm_mean(const BanditInstance& inst, const SuperArm& s,
                      const std::vector<PullCount>& pull_counts_after);

std::string format_super_arm(const SuperArm& s);  // 1-based, e.g. "{1,3}"

}  // namespace crlab
