#include "crlab/environment.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "crlab/errors.hpp"

namespace crlab {
namespace {

constexpr int kMaxRejections = 1000;

}  // namespace

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

Rng make_rng(std::uint64_t seed, std::string_view stream) {
  const std::uint64_t label = fnv1a(stream);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(label), static_cast<std::uint32_t>(label >> 32)};
  return Rng(seq);
}

double sample_outcome(double mean, double sigma, Rng& rng) {
  if (sigma == 0.0) return mean;
  std::normal_distribution<double> noise(mean, sigma);
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    double x = noise(rng);
    if (x >= 0.0 && x <= 1.0) return x;
  }
  // Only reachable when the mean sits far outside [0,1] relative to sigma.
  return std::clamp(mean, 0.0, 1.0);
}

FeedbackRecord env_step(const BanditInstance& inst, std::vector<PullCount>& pull_counts,
                        const SuperArm& s, PullCount t, Rng& rng) {
  if (t < 1 || t > inst.horizon) {
    throw RangeError(fmt::format("time step {} outside [1, {}]", t, inst.horizon));
  }
  if (!inst.family.contains(s)) {
    throw InvalidActionError(fmt::format("super arm {} is not in the family", format_super_arm(s)));
  }
  if (pull_counts.size() != inst.arms.size()) {
    throw ParameterError("pull-count vector does not match the number of arms");
  }
  FeedbackRecord record;
  record.t = t;
  record.super_arm = s;
  record.outcomes.reserve(s.size());
  for (ArmIndex a : s) {
    const PullCount n = pull_counts[a] + 1;
    const double mean = inst.arms[a].mu(n);
    record.outcomes.push_back({a, sample_outcome(mean, inst.sigma, rng), n});
    pull_counts[a] = n;
  }
  return record;
}

double kmax_reward(std::span<const double> outcomes) {
  if (outcomes.empty()) throw ParameterError("kmax reward of an empty super arm");
  return *std::max_element(outcomes.begin(), outcomes.end());
}

double realised_reward(const BanditInstance& inst, const FeedbackRecord& record) {
  std::vector<double> values;
  values.reserve(record.outcomes.size());
  for (const auto& o : record.outcomes) values.push_back(o.value);
  if (inst.reward == RewardModel::KMax) return kmax_reward(values);
  double total = 0.0;
  for (double v : values) total += v;
  return total;
}

}  // namespace crlab
