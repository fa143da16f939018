#include "crlab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <fmt/format.h>

#include "crlab/errors.hpp"
#include "crlab/solvers.hpp"

namespace crlab {
namespace {

// Expected reward of one step of `s` with members at the given pull index.
double step_reward(const BanditInstance& inst, const SuperArm& s, PullCount n) {
  if (inst.reward == RewardModel::KMax) {
    double best = 0.0;
    for (ArmIndex a : s) best = std::max(best, inst.arms[a].mu(n));
    return best;
  }
  double total = 0.0;
  for (ArmIndex a : s) total += inst.arms[a].mu(n);
  return total;
}

void check_time(const BanditInstance& inst, PullCount t) {
  if (t < 1 || t > inst.horizon) throw RangeError(fmt::format("t = {} outside [1, {}]", t, inst.horizon));
}

bool better(double v, const SuperArm& s, double best_v, const SuperArm& best_s) {
  const double tol = 1e-12 * std::max({1.0, std::abs(v), std::abs(best_v)});
  if (v > best_v + tol) return true;
  if (v < best_v - tol) return false;
  return tie_precedes(s, best_s);
}

}  // namespace

double constant_policy_value(const BanditInstance& inst, const SuperArm& s, PullCount t) {
  check_time(inst, t);
  if (!inst.family.contains(s)) {
    throw InvalidActionError(fmt::format("super arm {} is not in the family", format_super_arm(s)));
  }
  double total = 0.0;
  for (PullCount n = 1; n <= t; ++n) total += step_reward(inst, s, n);
  return total;
}

OracleTable oracle_table(const BanditInstance& inst, PullCount horizon, std::size_t cap) {
  check_time(inst, horizon);
  OracleTable table;
  table.value.reserve(static_cast<std::size_t>(horizon));
  table.arm.reserve(static_cast<std::size_t>(horizon));

  std::vector<SuperArm> all;
  try {
    all = enumerate_super_arms(inst.family, cap);
  } catch (const EnumerationOverflow&) {
    if (inst.reward == RewardModel::KMax) throw;
    table.enumerated = false;
    std::vector<double> w(inst.num_arms());
    for (PullCount t = 1; t <= horizon; ++t) {
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = inst.arms[i].cumulative(t) / static_cast<double>(t);
      SuperArm s = solve(inst.family, w);
      double v = 0.0;
      for (ArmIndex a : s) v += inst.arms[a].cumulative(t);
      table.value.push_back(table.value.empty() ? v : std::max(v, table.value.back()));
      table.arm.push_back(std::move(s));
    }
    return table;
  }

  // Running sums are accumulated in the same order as a played trajectory, so
  // the oracle constant policy reproduces oracle_cum bit for bit.
  std::vector<double> running(all.size(), 0.0);
  for (PullCount t = 1; t <= horizon; ++t) {
    std::size_t best = 0;
    double max_value = 0.0;
    for (std::size_t k = 0; k < all.size(); ++k) {
      running[k] += step_reward(inst, all[k], t);
      if (k == 0 || better(running[k], all[k], running[best], all[best])) best = k;
      max_value = k == 0 ? running[k] : std::max(max_value, running[k]);
    }
    table.value.push_back(max_value);
    table.arm.push_back(all[best]);
  }
  return table;
}

OracleResult oracle_super_arm(const BanditInstance& inst, PullCount t, std::size_t cap) {
  auto table = oracle_table(inst, t, cap);
  OracleResult r;
  r.arm = table.arm.back();
  r.enumerated = table.enumerated;
  if (table.enumerated) {
    // Same accumulation order as the table and as a played trajectory.
    for (PullCount n = 1; n <= t; ++n) r.value += step_reward(inst, r.arm, n);
  } else {
    for (ArmIndex a : r.arm) r.value += inst.arms[a].cumulative(t);
  }
  return r;
}

std::vector<PullCount> oracle_switches(const OracleTable& table) {
  std::vector<PullCount> out;
  for (std::size_t k = 1; k < table.arm.size(); ++k) {
    if (table.arm[k] != table.arm[k - 1]) out.push_back(static_cast<PullCount>(k + 1));
  }
  return out;
}

RegretCurve regret_curve(const BanditInstance& inst, std::span<const SuperArm> actions, std::size_t cap) {
  if (actions.empty()) return {};
  if (static_cast<PullCount>(actions.size()) > inst.horizon) {
    throw ParameterError(fmt::format("trace of length {} exceeds horizon {}", actions.size(), inst.horizon));
  }
  return regret_curve(inst, actions, oracle_table(inst, static_cast<PullCount>(actions.size()), cap));
}

RegretCurve regret_curve(const BanditInstance& inst, std::span<const SuperArm> actions, const OracleTable& oracle) {
  if (actions.size() > oracle.value.size()) {
    throw ParameterError(fmt::format("trace of length {} exceeds the oracle table ({})", actions.size(),
                                     oracle.value.size()));
  }
  RegretCurve c;
  const std::size_t n = actions.size();
  c.expected_reward.reserve(n);
  c.policy_cum.reserve(n);
  c.oracle_cum.assign(oracle.value.begin(), oracle.value.begin() + static_cast<std::ptrdiff_t>(n));
  c.regret.reserve(n);
  std::vector<PullCount> pulls(inst.num_arms(), 0);
  double cum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const SuperArm& s = actions[k];
    if (!inst.family.contains(s)) {
      throw InvalidActionError(fmt::format("step {}: super arm {} is not in the family", k + 1, format_super_arm(s)));
    }
    for (ArmIndex a : s) ++pulls[a];
    const double r = super_arm_mean(inst, s, pulls);
    cum += r;
    c.expected_reward.push_back(r);
    c.policy_cum.push_back(cum);
    c.regret.push_back(c.oracle_cum[k] - cum);
  }
  return c;
}

double cumulative_increment(const std::function<double(PullCount)>& max_gamma, PullCount m, double q) {
  if (m < 1) throw ParameterError("M must be >= 1");
  if (!(q >= 0.0 && q <= 1.0)) throw ParameterError("q must lie in [0, 1]");
  double total = 0.0;
  for (PullCount l = 1; l < m; ++l) {
    const double g = std::max(0.0, max_gamma(l));
    if (g > 0.0) total += std::pow(g, q);
  }
  return total;
}

double cumulative_increment(const BanditInstance& inst, PullCount m, double q) {
  return cumulative_increment(
      [&](PullCount l) {
        double best = 0.0;
        for (const auto& f : inst.arms) {
          if (l < f.horizon()) best = std::max(best, f.gamma(l));
        }
        return best;
      },
      m, q);
}

BruteForceResult brute_force_optimal(const BanditInstance& inst, PullCount t_small) {
  if (t_small < 1 || t_small > kBruteForceMaxHorizon) {
    throw ParameterError(fmt::format("brute force needs 1 <= T <= {}", kBruteForceMaxHorizon));
  }
  check_time(inst, t_small);
  BruteForceResult r;
  try {
    r.super_arms = enumerate_super_arms(inst.family, kBruteForceMaxSuperArms);
  } catch (const EnumerationOverflow&) {
    throw ParameterError(fmt::format("brute force needs at most {} super arms", kBruteForceMaxSuperArms));
  }
  const std::size_t k_count = r.super_arms.size();

  if (inst.reward == RewardModel::Additive) {
    auto value_of = [&](const std::vector<PullCount>& pulls) {
      double v = 0.0;
      for (std::size_t i = 0; i < pulls.size(); ++i) v += inst.arms[i].cumulative(pulls[i]);
      return v;
    };
    std::vector<std::size_t> alloc(k_count, 0);
    std::vector<PullCount> pulls(inst.num_arms(), 0);
    bool have = false;
    std::function<void(std::size_t, PullCount)> rec = [&](std::size_t k, PullCount left) {
      if (k + 1 == k_count) {
        alloc[k] = static_cast<std::size_t>(left);
        for (ArmIndex a : r.super_arms[k]) pulls[a] += left;
        const double v = value_of(pulls);
        if (!have || v > r.best_value) {
          have = true;
          r.best_value = v;
          r.witness = alloc;
        }
        for (ArmIndex a : r.super_arms[k]) pulls[a] -= left;
        return;
      }
      for (PullCount x = 0; x <= left; ++x) {
        alloc[k] = static_cast<std::size_t>(x);
        for (ArmIndex a : r.super_arms[k]) pulls[a] += x;
        rec(k + 1, left - x);
        for (ArmIndex a : r.super_arms[k]) pulls[a] -= x;
      }
    };
    rec(0, t_small);
    for (std::size_t k = 0; k < k_count; ++k) {
      std::vector<PullCount> p(inst.num_arms(), 0);
      for (ArmIndex a : r.super_arms[k]) p[a] = t_small;
      const double v = value_of(p);
      if (k == 0 || v > r.best_constant_value) {
        r.best_constant_value = v;
        r.best_constant = r.super_arms[k];
      }
    }
    return r;
  }

  r.witness_is_sequence = true;
  std::vector<std::size_t> seq;
  std::vector<PullCount> pulls(inst.num_arms(), 0);
  bool have = false;
  std::function<void(double)> rec = [&](double acc) {
    if (static_cast<PullCount>(seq.size()) == t_small) {
      if (!have || acc > r.best_value) {
        have = true;
        r.best_value = acc;
        r.witness = seq;
      }
      return;
    }
    for (std::size_t k = 0; k < k_count; ++k) {
      const auto& s = r.super_arms[k];
      for (ArmIndex a : s) ++pulls[a];
      double step = 0.0;
      for (ArmIndex a : s) step = std::max(step, inst.arms[a].mu(pulls[a]));
      seq.push_back(k);
      rec(acc + step);
      seq.pop_back();
      for (ArmIndex a : s) --pulls[a];
    }
  };
  rec(0.0);
  for (std::size_t k = 0; k < k_count; ++k) {
    const double v = constant_policy_value(inst, r.super_arms[k], t_small);
    if (k == 0 || v > r.best_constant_value) {
      r.best_constant_value = v;
      r.best_constant = r.super_arms[k];
    }
  }
  return r;
}

}  // namespace crlab
