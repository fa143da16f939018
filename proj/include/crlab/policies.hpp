#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "crlab/environment.hpp"
#include "crlab/instance.hpp"
#include "crlab/instance_json.hpp"

namespace crlab {

/// Outcomes X(1..N) of one arm (or one super arm), indexed by pull count.
class ArmHistory {
 public:
  void push(double x) { outcomes_.push_back(x); }
  PullCount count() const { return static_cast<PullCount>(outcomes_.size()); }
  /// X(l), 1-based.
  double at(PullCount l) const { return outcomes_[static_cast<std::size_t>(l - 1)]; }
  const std::vector<double>& outcomes() const { return outcomes_; }

 private:
  std::vector<double> outcomes_;
};

struct CrucbConfig {
  double epsilon = 0.25;
  double sigma = 0.01;
};

struct FuturePotential {
  PullCount window = 0;
  double mu_hat = 0.0;
  double beta = 0.0;
  double mu_acute = 0.0;
};

/// Extrapolated estimate of the arm's mean at time t from its last h outcomes
/// and their slope over h pulls, plus a confidence bonus. Returns nullopt when
/// N < 2 (not enough history for a slope).
std::optional<FuturePotential> crucb_future_potential(const ArmHistory& hist, PullCount t, const CrucbConfig& cfg);

/// Window h = max(1, floor(epsilon * N)).
PullCount crucb_window(PullCount n, double epsilon);

/// Bonus sqrt(3 ln t / (2N)) shared by the sliding-window UCB variants.
double sw_ucb_bonus(PullCount t, PullCount n);

/// Beta posterior (prior (1,1)) over a window of outcomes in [0,1].
struct PosteriorPair {
  double alpha = 1.0;
  double beta = 1.0;
};

PosteriorPair window_posterior(const std::deque<double>& window);

/// Draw from Beta(alpha, beta) via two gamma variates.
double sample_beta(const PosteriorPair& p, Rng& rng);

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual SuperArm select(PullCount t) = 0;
  virtual void update(const FeedbackRecord& record) = 0;
};

/// Weight handed to the solver for arms that still need forced exploration.
/// It dominates every clamped finite weight.
inline constexpr double kExplorationWeight = 3.0;
inline constexpr double kWeightClamp = 2.0;

class CrucbPolicy : public Policy {
 public:
  using Observer = std::function<void(ArmIndex arm, PullCount t, const ArmHistory& hist, const FuturePotential& fp)>;

  CrucbPolicy(const BanditInstance& inst, CrucbConfig cfg);
  std::string name() const override { return "crucb"; }
  SuperArm select(PullCount t) override;
  void update(const FeedbackRecord& record) override;

  /// Called once per estimator evaluation; used by tests.
  void set_observer(Observer obs) { observer_ = std::move(obs); }
  const std::vector<double>& last_weights() const { return weights_; }

 private:
  SuperArmFamily family_;
  CrucbConfig cfg_;
  std::vector<ArmHistory> history_;
  std::vector<double> weights_;
  Observer observer_;
};

/// Super-arm level policies share the enumeration and the tie order.
class SuperArmPolicy : public Policy {
 public:
  SuperArmPolicy(const BanditInstance& inst, std::size_t enumeration_cap);
  SuperArm select(PullCount t) override;
  void update(const FeedbackRecord& record) override;
  const std::vector<SuperArm>& super_arms() const { return super_arms_; }

 protected:
  /// Super arm that must be played regardless of scores (initialisation), or
  /// nullopt to take the argmax of `score`.
  virtual std::optional<std::size_t> forced(PullCount t) const;
  virtual double score(std::size_t k, PullCount t) = 0;
  virtual void record(std::size_t k, double reward) = 0;

  std::vector<SuperArm> super_arms_;
  std::vector<PullCount> plays_;
  RewardModel reward_ = RewardModel::Additive;
  std::size_t max_size_ = 1;
};

class RedUcbPolicy : public SuperArmPolicy {
 public:
  RedUcbPolicy(const BanditInstance& inst, CrucbConfig cfg, std::size_t enumeration_cap);
  std::string name() const override { return "red-ucb"; }

 protected:
  std::optional<std::size_t> forced(PullCount t) const override;
  double score(std::size_t k, PullCount t) override;
  void record(std::size_t k, double reward) override;

 private:
  CrucbConfig cfg_;
  std::vector<ArmHistory> history_;
};

class SwUcbPolicy : public SuperArmPolicy {
 public:
  SwUcbPolicy(const BanditInstance& inst, std::size_t window, std::size_t enumeration_cap);
  std::string name() const override { return "sw-ucb"; }

 protected:
  double score(std::size_t k, PullCount t) override;
  void record(std::size_t k, double reward) override;

 private:
  std::size_t window_;
  std::vector<std::deque<double>> recent_;
};

class SwTsPolicy : public SuperArmPolicy {
 public:
  SwTsPolicy(const BanditInstance& inst, std::size_t window, std::size_t enumeration_cap, Rng rng);
  std::string name() const override { return "sw-ts"; }

 protected:
  std::optional<std::size_t> forced(PullCount) const override { return std::nullopt; }
  double score(std::size_t k, PullCount t) override;
  void record(std::size_t k, double reward) override;

 private:
  std::size_t window_;
  std::vector<std::deque<double>> recent_;  // normalised by L
  Rng rng_;
};

class SwCucbPolicy : public Policy {
 public:
  SwCucbPolicy(const BanditInstance& inst, std::size_t window);
  std::string name() const override { return "sw-cucb"; }
  SuperArm select(PullCount t) override;
  void update(const FeedbackRecord& record) override;

 private:
  SuperArmFamily family_;
  std::size_t window_;
  std::vector<std::deque<double>> recent_;
  std::vector<PullCount> pulls_;
};

class SwCtsPolicy : public Policy {
 public:
  SwCtsPolicy(const BanditInstance& inst, std::size_t window, Rng rng);
  std::string name() const override { return "sw-cts"; }
  SuperArm select(PullCount t) override;
  void update(const FeedbackRecord& record) override;

 private:
  SuperArmFamily family_;
  std::size_t window_;
  std::vector<std::deque<double>> recent_;
  Rng rng_;
};

class ConstantPolicy : public Policy {
 public:
  /// Throws InvalidActionError when `s` is not in the family.
  ConstantPolicy(const BanditInstance& inst, SuperArm s, std::string label = "constant");
  std::string name() const override { return label_; }
  SuperArm select(PullCount) override { return arm_; }
  void update(const FeedbackRecord&) override {}
  const SuperArm& arm() const { return arm_; }

 private:
  SuperArm arm_;
  std::string label_;
};

struct PolicySpec {
  std::string name;
  Json params = Json::object();
};

/// Builds a policy by name ("crucb", "red-ucb", "sw-ucb", "sw-ts", "sw-cucb",
/// "sw-cts", "constant", "oracle-constant"). Randomised policies draw from
/// make_rng(seed, "policy/<name>"). Throws ConfigError on bad parameters.
std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const BanditInstance& inst, std::uint64_t seed,
                                    const std::string& path = "policy");

const std::vector<std::string>& policy_names();

}  // namespace crlab
