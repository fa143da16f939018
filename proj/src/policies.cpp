#include "crlab/policies.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "crlab/errors.hpp"
#include "crlab/oracle.hpp"
#include "crlab/solvers.hpp"

namespace crlab {
namespace {

constexpr std::size_t kDefaultEnumerationCap = 10000;
constexpr std::size_t kDefaultWindow = 100;

bool strictly_greater(double a, double b) {
  return a > b + 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

double window_mean(const std::deque<double>& w) {
  return std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
}

void push_window(std::deque<double>& w, double x, std::size_t cap) {
  w.push_back(x);
  while (w.size() > cap) w.pop_front();
}

double combine(RewardModel model, const FeedbackRecord& record) {
  double total = 0.0;
  double best = 0.0;
  for (const auto& o : record.outcomes) {
    total += o.value;
    best = std::max(best, o.value);
  }
  return model == RewardModel::KMax ? best : total;
}

}  // namespace

PullCount crucb_window(PullCount n, double epsilon) {
  return std::max<PullCount>(1, static_cast<PullCount>(std::floor(epsilon * static_cast<double>(n))));
}

std::optional<FuturePotential> crucb_future_potential(const ArmHistory& hist, PullCount t, const CrucbConfig& cfg) {
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 0.5)) throw ParameterError("epsilon must lie in (0, 1/2)");
  if (cfg.sigma < 0.0) throw ParameterError("sigma must be >= 0");
  const PullCount n = hist.count();
  if (n < 2) return std::nullopt;
  const PullCount h = crucb_window(n, cfg.epsilon);
  const double hd = static_cast<double>(h);

  double sum = 0.0;
  for (PullCount l = n - h + 1; l <= n; ++l) {
    const double slope = (hist.at(l) - hist.at(l - h)) / hd;
    sum += hist.at(l) + static_cast<double>(t - l) * slope;
  }
  FuturePotential fp;
  fp.window = h;
  fp.mu_hat = sum / hd;
  const double log_t = std::log(static_cast<double>(std::max<PullCount>(t, 2)));
  const double lag = std::max(0.0, static_cast<double>(t - n + h - 1));
  fp.beta = cfg.sigma * lag * std::sqrt(10.0 * 3.0 * log_t / (hd * hd * hd));
  fp.mu_acute = fp.mu_hat + fp.beta;
  return fp;
}

double sw_ucb_bonus(PullCount t, PullCount n) {
  if (n < 1) throw ParameterError("bonus needs at least one observation");
  const double log_t = std::log(static_cast<double>(std::max<PullCount>(t, 1)));
  return std::sqrt(3.0 * log_t / (2.0 * static_cast<double>(n)));
}

PosteriorPair window_posterior(const std::deque<double>& window) {
  PosteriorPair p;
  for (double x : window) {
    p.alpha += x;
    p.beta += 1.0 - x;
  }
  return p;
}

double sample_beta(const PosteriorPair& p, Rng& rng) {
  std::gamma_distribution<double> ga(p.alpha, 1.0);
  std::gamma_distribution<double> gb(p.beta, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  if (x + y <= 0.0) return 0.5;
  return std::clamp(x / (x + y), 0.0, 1.0);
}

// CRUCB

CrucbPolicy::CrucbPolicy(const BanditInstance& inst, CrucbConfig cfg)
    : family_(inst.family), cfg_(cfg), history_(inst.num_arms()), weights_(inst.num_arms(), 0.0) {
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 0.5)) throw ParameterError("epsilon must lie in (0, 1/2)");
}

SuperArm CrucbPolicy::select(PullCount t) {
  for (std::size_t i = 0; i < history_.size(); ++i) {
    auto fp = crucb_future_potential(history_[i], t, cfg_);
    if (!fp) {
      weights_[i] = kExplorationWeight;
      continue;
    }
    if (observer_) observer_(static_cast<ArmIndex>(i), t, history_[i], *fp);
    weights_[i] = std::clamp(fp->mu_acute, 0.0, kWeightClamp);
  }
  return solve(family_, weights_, {kExplorationWeight - 1.0});
}

void CrucbPolicy::update(const FeedbackRecord& record) {
  for (const auto& o : record.outcomes) history_[o.arm].push(o.value);
}

// Super-arm policies

SuperArmPolicy::SuperArmPolicy(const BanditInstance& inst, std::size_t enumeration_cap)
    : super_arms_(enumerate_super_arms(inst.family, enumeration_cap)),
      reward_(inst.reward),
      max_size_(std::max<std::size_t>(1, inst.family.max_size())) {
  std::sort(super_arms_.begin(), super_arms_.end(), tie_precedes);
  plays_.assign(super_arms_.size(), 0);
}

std::optional<std::size_t> SuperArmPolicy::forced(PullCount) const {
  for (std::size_t k = 0; k < plays_.size(); ++k) {
    if (plays_[k] == 0) return k;
  }
  return std::nullopt;
}

SuperArm SuperArmPolicy::select(PullCount t) {
  if (auto k = forced(t)) return super_arms_[*k];
  std::size_t best = 0;
  double best_score = score(0, t);
  for (std::size_t k = 1; k < super_arms_.size(); ++k) {
    const double s = score(k, t);
    if (strictly_greater(s, best_score)) {
      best = k;
      best_score = s;
    }
  }
  return super_arms_[best];
}

void SuperArmPolicy::update(const FeedbackRecord& fb) {
  auto it = std::lower_bound(super_arms_.begin(), super_arms_.end(), fb.super_arm, tie_precedes);
  if (it == super_arms_.end() || *it != fb.super_arm) {
    throw InvalidActionError(fmt::format("feedback for unknown super arm {}", format_super_arm(fb.super_arm)));
  }
  const auto k = static_cast<std::size_t>(it - super_arms_.begin());
  ++plays_[k];
  record(k, combine(reward_, fb));
}

RedUcbPolicy::RedUcbPolicy(const BanditInstance& inst, CrucbConfig cfg, std::size_t enumeration_cap)
    : SuperArmPolicy(inst, enumeration_cap), cfg_(cfg), history_(super_arms_.size()) {
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 0.5)) throw ParameterError("epsilon must lie in (0, 1/2)");
}

// The estimator needs two outcomes, so every super arm is played twice,
// round-robin, before any scoring.
std::optional<std::size_t> RedUcbPolicy::forced(PullCount) const {
  std::optional<std::size_t> pick;
  for (std::size_t k = 0; k < plays_.size(); ++k) {
    if (plays_[k] < 2 && (!pick || plays_[k] < plays_[*pick])) pick = k;
  }
  return pick;
}

double RedUcbPolicy::score(std::size_t k, PullCount t) {
  CrucbConfig cfg = cfg_;
  if (reward_ == RewardModel::Additive) cfg.sigma *= std::sqrt(static_cast<double>(super_arms_[k].size()));
  return crucb_future_potential(history_[k], t, cfg)->mu_acute;
}

void RedUcbPolicy::record(std::size_t k, double reward) { history_[k].push(reward); }

SwUcbPolicy::SwUcbPolicy(const BanditInstance& inst, std::size_t window, std::size_t enumeration_cap)
    : SuperArmPolicy(inst, enumeration_cap), window_(window), recent_(super_arms_.size()) {
  if (window < 1) throw ParameterError("window must be >= 1");
}

double SwUcbPolicy::score(std::size_t k, PullCount t) {
  return window_mean(recent_[k]) + sw_ucb_bonus(t, plays_[k]);
}

void SwUcbPolicy::record(std::size_t k, double reward) { push_window(recent_[k], reward, window_); }

SwTsPolicy::SwTsPolicy(const BanditInstance& inst, std::size_t window, std::size_t enumeration_cap, Rng rng)
    : SuperArmPolicy(inst, enumeration_cap), window_(window), recent_(super_arms_.size()), rng_(std::move(rng)) {
  if (window < 1) throw ParameterError("window must be >= 1");
}

double SwTsPolicy::score(std::size_t k, PullCount) { return sample_beta(window_posterior(recent_[k]), rng_); }

void SwTsPolicy::record(std::size_t k, double reward) {
  const double scale = reward_ == RewardModel::KMax ? 1.0 : static_cast<double>(max_size_);
  push_window(recent_[k], std::clamp(reward / scale, 0.0, 1.0), window_);
}

// Base-arm sliding-window policies

SwCucbPolicy::SwCucbPolicy(const BanditInstance& inst, std::size_t window)
    : family_(inst.family), window_(window), recent_(inst.num_arms()), pulls_(inst.num_arms(), 0) {
  if (window < 1) throw ParameterError("window must be >= 1");
}

SuperArm SwCucbPolicy::select(PullCount t) {
  std::vector<double> w(recent_.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = pulls_[i] == 0 ? kExplorationWeight
                          : std::clamp(window_mean(recent_[i]) + sw_ucb_bonus(t, pulls_[i]), 0.0, kWeightClamp);
  }
  return solve(family_, w, {kExplorationWeight - 1.0});
}

void SwCucbPolicy::update(const FeedbackRecord& record) {
  for (const auto& o : record.outcomes) {
    ++pulls_[o.arm];
    push_window(recent_[o.arm], o.value, window_);
  }
}

SwCtsPolicy::SwCtsPolicy(const BanditInstance& inst, std::size_t window, Rng rng)
    : family_(inst.family), window_(window), recent_(inst.num_arms()), rng_(std::move(rng)) {
  if (window < 1) throw ParameterError("window must be >= 1");
}

SuperArm SwCtsPolicy::select(PullCount) {
  std::vector<double> theta(recent_.size());
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = sample_beta(window_posterior(recent_[i]), rng_);
  return solve(family_, theta);
}

void SwCtsPolicy::update(const FeedbackRecord& record) {
  for (const auto& o : record.outcomes) push_window(recent_[o.arm], std::clamp(o.value, 0.0, 1.0), window_);
}

ConstantPolicy::ConstantPolicy(const BanditInstance& inst, SuperArm s, std::string label)
    : arm_(std::move(s)), label_(std::move(label)) {
  std::sort(arm_.begin(), arm_.end());
  if (!inst.family.contains(arm_)) {
    throw InvalidActionError(fmt::format("super arm {} is not in the family", format_super_arm(arm_)));
  }
}

// Factory

namespace {

template <class T>
T param(const Json& params, const char* key, T fallback, const std::string& path) {
  if (!params.contains(key)) return fallback;
  try {
    return params.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(path + "." + key, "has the wrong type");
  }
}

}  // namespace

const std::vector<std::string>& policy_names() {
  static const std::vector<std::string> names = {"crucb",   "red-ucb", "sw-ucb",   "sw-ts",
                                                 "sw-cucb", "sw-cts",  "constant", "oracle-constant"};
  return names;
}

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const BanditInstance& inst, std::uint64_t seed,
                                    const std::string& path) {
  const Json& p = spec.params;
  const std::string ppath = path + ".params";
  if (!p.is_object()) throw ConfigError(ppath, "expected an object");
  auto crucb_cfg = [&] {
    CrucbConfig cfg{param<double>(p, "epsilon", 0.25, ppath), param<double>(p, "sigma", inst.sigma, ppath)};
    if (!(cfg.epsilon > 0.0 && cfg.epsilon < 0.5)) throw ConfigError(ppath + ".epsilon", "must lie in (0, 1/2)");
    if (cfg.sigma < 0.0) throw ConfigError(ppath + ".sigma", "must be >= 0");
    return cfg;
  };
  auto window = [&] {
    const auto w = param<long long>(p, "window", static_cast<long long>(kDefaultWindow), ppath);
    if (w < 1) throw ConfigError(ppath + ".window", "must be >= 1");
    return static_cast<std::size_t>(w);
  };
  auto cap = [&] {
    const auto c = param<long long>(p, "enumeration_cap", static_cast<long long>(kDefaultEnumerationCap), ppath);
    if (c < 1) throw ConfigError(ppath + ".enumeration_cap", "must be >= 1");
    return static_cast<std::size_t>(c);
  };
  auto rng = [&] { return make_rng(seed, "policy/" + spec.name); };

  try {
    if (spec.name == "crucb") {
      reject_unknown_keys(p, {"epsilon", "sigma"}, ppath);
      return std::make_unique<CrucbPolicy>(inst, crucb_cfg());
    }
    if (spec.name == "red-ucb") {
      reject_unknown_keys(p, {"epsilon", "sigma", "enumeration_cap"}, ppath);
      return std::make_unique<RedUcbPolicy>(inst, crucb_cfg(), cap());
    }
    if (spec.name == "sw-ucb") {
      reject_unknown_keys(p, {"window", "enumeration_cap"}, ppath);
      return std::make_unique<SwUcbPolicy>(inst, window(), cap());
    }
    if (spec.name == "sw-ts") {
      reject_unknown_keys(p, {"window", "enumeration_cap"}, ppath);
      return std::make_unique<SwTsPolicy>(inst, window(), cap(), rng());
    }
    if (spec.name == "sw-cucb") {
      reject_unknown_keys(p, {"window"}, ppath);
      return std::make_unique<SwCucbPolicy>(inst, window());
    }
    if (spec.name == "sw-cts") {
      reject_unknown_keys(p, {"window"}, ppath);
      return std::make_unique<SwCtsPolicy>(inst, window(), rng());
    }
    if (spec.name == "constant") {
      reject_unknown_keys(p, {"super_arm"}, ppath);
      if (!p.contains("super_arm")) throw ConfigError(ppath + ".super_arm", "missing required field");
      SuperArm s;
      for (int a : param<std::vector<int>>(p, "super_arm", {}, ppath)) {
        if (a < 1) throw ConfigError(ppath + ".super_arm", "arm indices are 1-based");
        s.push_back(a - 1);
      }
      try {
        return std::make_unique<ConstantPolicy>(inst, std::move(s));
      } catch (const InvalidActionError& e) {
        throw ConfigError(ppath + ".super_arm", e.what());
      }
    }
    if (spec.name == "oracle-constant") {
      reject_unknown_keys(p, {"horizon", "enumeration_cap"}, ppath);
      const auto h = param<PullCount>(p, "horizon", inst.horizon, ppath);
      if (h < 1 || h > inst.horizon) throw ConfigError(ppath + ".horizon", "must lie in [1, instance horizon]");
      return std::make_unique<ConstantPolicy>(inst, oracle_super_arm(inst, h, cap()).arm, "oracle-constant");
    }
  } catch (const ParameterError& e) {
    throw ConfigError(ppath, e.what());
  }
  throw ConfigError(path + ".name", fmt::format("unknown policy '{}'", spec.name));
}

}  // namespace crlab
