#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "crlab/instance.hpp"

namespace crlab {

/// Late-bloomer / early-peaker environment. Late bloomers follow
/// mu(n) = lb_start + A * sum_{m<=n} m^(-c) with A chosen so mu(T) = lb_end;
/// every other arm is Constant(ep_level).
struct SyntheticParams {
  double c = 1.1;
  PullCount horizon = 200000;
  double lb_start = 0.0;
  double lb_end = 0.92;
  double ep_level = 0.8;
  double sigma = 0.01;
  /// "two_path" builds a 4-edge DAG: s->a (late bloomer), a->g, s->b, b->g.
  /// Ignored when `family` is provided.
  std::string graph = "two_path";
  std::optional<SuperArmFamily> family;
  std::vector<ArmIndex> late_bloomers;  // 0-based; required with a custom family
};

BanditInstance make_synthetic_instance(const SyntheticParams& params);

/// The two-instance construction behind the linear worst-case lower bound,
/// replicated L times with the product family {(a_1..a_L): a_i in {i, L+i}}.
std::pair<BanditInstance, BanditInstance> make_lower_bound_pair(PullCount horizon, int replication);

/// Growth-constrained pair: mu(m) = sum_{n<=m} (n+1)^(-c), scaled into [0,1]
/// when its range exceeds 1, with breakpoint P = round((2-c)^(1/(c-1)) T).
/// epsilon balances the two case regret expressions (bisection).
struct ConstrainedPair {
  BanditInstance a;
  BanditInstance b;
  PullCount breakpoint = 0;
  double epsilon = 0.0;
  double scale = 1.0;
  double balance_residual = 0.0;
};

ConstrainedPair make_constrained_pair(PullCount horizon, double c, int replication);

/// Non-additive (K-max) instance on which switching once beats the best
/// constant super arm. Requires horizon >= 1000.
BanditInstance make_kmax_counterexample(PullCount horizon);

struct GeneratorInfo {
  std::string name;
  std::string params;
  std::string summary;
};

std::vector<GeneratorInfo> generator_catalog();

}  // namespace crlab
