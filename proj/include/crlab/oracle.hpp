#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "crlab/instance.hpp"

namespace crlab {

inline constexpr std::size_t kOracleEnumerationCap = 10000;

/// Cumulative expected reward of pulling `s` at every step 1..t:
/// sum_{i in S} F_i(t) for additive rewards, sum_n max_{i in S} mu_i(n) for K-max.
double constant_policy_value(const BanditInstance& inst, const SuperArm& s, PullCount t);

struct OracleResult {
  SuperArm arm;
  double value = 0.0;
  bool enumerated = true;  // false when the solver fallback was used
};

/// Best constant super arm for horizon t. Enumerates the family when it has at
/// most `cap` members; otherwise additive instances fall back to the structural
/// solver with weights F_i(t)/t and K-max instances throw EnumerationOverflow.
OracleResult oracle_super_arm(const BanditInstance& inst, PullCount t, std::size_t cap = kOracleEnumerationCap);

/// oracle_cum(t) for t = 1..horizon, and the oracle super arm at each t.
struct OracleTable {
  std::vector<double> value;     // value[t-1]
  std::vector<SuperArm> arm;     // arm[t-1]
  bool enumerated = true;
};

OracleTable oracle_table(const BanditInstance& inst, PullCount horizon, std::size_t cap = kOracleEnumerationCap);

/// Times t >= 2 at which the horizon-t oracle differs from the one at t-1.
std::vector<PullCount> oracle_switches(const OracleTable& table);

struct RegretCurve {
  std::vector<double> expected_reward;  // per step, mu along the realised pull sequence
  std::vector<double> policy_cum;
  std::vector<double> oracle_cum;
  std::vector<double> regret;
};

/// Pseudo-regret of a played sequence of super arms against the horizon-t
/// oracle. Throws InvalidActionError for actions outside the family and
/// ParameterError when the trace is longer than the horizon.
RegretCurve regret_curve(const BanditInstance& inst, std::span<const SuperArm> actions,
                         std::size_t cap = kOracleEnumerationCap);

/// Same as above with a precomputed oracle table.
RegretCurve regret_curve(const BanditInstance& inst, std::span<const SuperArm> actions, const OracleTable& oracle);

/// Upsilon(M, q) = sum_{l=1..M-1} (max_i gamma_i(l))^q with 0^0 = 0.
/// Increments past the arms' horizon count as zero.
double cumulative_increment(const BanditInstance& inst, PullCount m, double q);

/// Same sum for an explicit envelope of the maximal increment.
double cumulative_increment(const std::function<double(PullCount)>& max_gamma, PullCount m, double q);

struct BruteForceResult {
  double best_value = 0.0;
  /// Additive: plays per super arm (indexed like `super_arms`).
  /// K-max: the order in which super arms were played (indices).
  std::vector<std::size_t> witness;
  bool witness_is_sequence = false;
  std::vector<SuperArm> super_arms;
  double best_constant_value = 0.0;
  SuperArm best_constant;
};

inline constexpr std::size_t kBruteForceMaxSuperArms = 6;
inline constexpr PullCount kBruteForceMaxHorizon = 10;

/// Exhaustive optimum over all policies of length t_small using expected
/// values. Additive instances search allocation vectors (order is irrelevant);
/// K-max instances search play sequences. Throws ParameterError past the caps.
BruteForceResult brute_force_optimal(const BanditInstance& inst, PullCount t_small);

}  // namespace crlab
