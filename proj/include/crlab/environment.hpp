#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crlab/instance.hpp"

namespace crlab {

using Rng = std::mt19937_64;
inline constexpr std::string_view kRngIdentity = "std::mt19937_64/seed_seq(seed_lo,seed_hi,stream)";

/// FNV-1a 64-bit hash; stable across platforms and runs.
std::uint64_t fnv1a(std::string_view text);

/// One generator per run, derived from the experiment seed and a stream label
/// (the policy id).
Rng make_rng(std::uint64_t seed, std::string_view stream);

struct Outcome {
  ArmIndex arm = 0;
  double value = 0.0;
  PullCount pulls_after = 0;  // N_{i,t}, including this pull
};

/// Semi-bandit feedback for one step: one outcome per member of the super arm.
struct FeedbackRecord {
  PullCount t = 0;
  SuperArm super_arm;
  std::vector<Outcome> outcomes;
};

/// Draws X_i ~ Normal(mu_i(N_i + 1), sigma^2) truncated to [0,1] for every
/// i in `s` and increments the pull counts. With sigma = 0 the outcome is the
/// mean exactly. Throws InvalidActionError when s is not in the family and
/// RangeError when t exceeds the horizon.
FeedbackRecord env_step(const BanditInstance& inst, std::vector<PullCount>& pull_counts,
                        const SuperArm& s, PullCount t, Rng& rng);

/// Truncated-normal draw on [0,1] by rejection.
double sample_outcome(double mean, double sigma, Rng& rng);

/// Max of member outcomes; throws ParameterError when empty.
double kmax_reward(std::span<const double> outcomes);

/// Realised super-arm reward of a feedback record under the instance's model.
double realised_reward(const BanditInstance& inst, const FeedbackRecord& record);

}  // namespace crlab
