#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "crlab/bounds.hpp"
#include "crlab/errors.hpp"
#include "crlab/generators.hpp"
#include "crlab/oracle.hpp"

using namespace crlab;

namespace {

BanditInstance two_singletons(PullCount horizon = 10) {
  BanditInstance inst;
  inst.horizon = horizon;
  inst.arms = {RisingFunction(Constant{0.5}, horizon), RisingFunction::saturating_ramp(0.3, 1.0, horizon)};
  inst.family = SuperArmFamily(ExplicitSubsets{{{0}, {1}}}, Sense::Maximize);
  return inst;
}

BanditInstance small_kmax() {
  const PullCount T = 10;
  BanditInstance inst;
  inst.horizon = T;
  inst.reward = RewardModel::KMax;
  inst.arms.push_back(RisingFunction::saturating_ramp(0.2, 1.0, T));
  std::vector<double> m2(T, 0.9);
  m2[0] = 0.1;
  inst.arms.emplace_back(Tabulated{m2}, T);
  inst.arms.emplace_back(Constant{0.5}, T);
  inst.family = SuperArmFamily(ExplicitSubsets{{{0, 1}, {1, 2}}}, Sense::Maximize);
  return inst;
}

// Random concave rising table on a 1/64 grid: nonincreasing integer increments.
std::vector<double> concave_table(PullCount n, std::mt19937_64& rng) {
  std::vector<int> inc(static_cast<std::size_t>(n));
  std::uniform_int_distribution<int> d(0, 12);
  for (auto& x : inc) x = d(rng);
  std::sort(inc.begin(), inc.end(), std::greater<>());
  std::vector<double> v;
  int level = std::uniform_int_distribution<int>(0, 8)(rng);
  for (PullCount k = 0; k < n; ++k) {
    if (k > 0) level += inc[static_cast<std::size_t>(k)];
    v.push_back(std::min(64, level) / 64.0);
  }
  return v;
}

long double power_partial_sum(double c, PullCount m, double q) {
  long double s = 0;
  for (PullCount l = 1; l < m; ++l) s += std::pow(static_cast<long double>(l + 1), -static_cast<long double>(c) * q);
  return s;
}

}  // namespace

TEST(Oracle, TwoSingletons) {
  auto inst = two_singletons();
  auto r1 = oracle_super_arm(inst, 1);
  EXPECT_EQ(r1.arm, (SuperArm{0}));
  EXPECT_DOUBLE_EQ(r1.value, 0.5);
  auto r4 = oracle_super_arm(inst, 4);
  EXPECT_EQ(r4.arm, (SuperArm{1}));
  EXPECT_NEAR(r4.value, 2.8, 1e-12);
  EXPECT_TRUE(r4.enumerated);
  EXPECT_THROW(oracle_super_arm(inst, 11), RangeError);
  EXPECT_THROW(oracle_super_arm(inst, 0), RangeError);
}

TEST(Oracle, SwitchTimes) {
  // 0.5 t against 0.3 + 0.6 + 0.9 + (t - 3): equal at t = 3.6 / 1.5.
  auto table = oracle_table(two_singletons(), 10);
  EXPECT_EQ(oracle_switches(table), (std::vector<PullCount>{3}));
  for (std::size_t k = 1; k < table.value.size(); ++k) EXPECT_GE(table.value[k], table.value[k - 1]);
}

TEST(Oracle, SolverFallbackAgreesWithEnumeration) {
  SyntheticParams sp;
  sp.horizon = 2000;
  auto inst = make_synthetic_instance(sp);
  for (PullCount t : {1, 50, 500, 1999, 2000}) {
    auto full = oracle_super_arm(inst, t);
    auto fallback = oracle_super_arm(inst, t, 1);
    EXPECT_TRUE(full.enumerated);
    EXPECT_FALSE(fallback.enumerated);
    EXPECT_EQ(full.arm, fallback.arm) << t;
    EXPECT_NEAR(full.value, fallback.value, 1e-9 * t);
  }
}

TEST(Oracle, KmaxWithoutEnumerationFails) {
  EXPECT_THROW(oracle_super_arm(make_kmax_counterexample(1000), 10, 1), EnumerationOverflow);
}

TEST(Regret, OracleConstantEndsAtZero) {
  SyntheticParams sp;
  sp.horizon = 5000;
  auto inst = make_synthetic_instance(sp);
  auto best = oracle_super_arm(inst, inst.horizon).arm;
  std::vector<SuperArm> trace(static_cast<std::size_t>(inst.horizon), best);
  auto curve = regret_curve(inst, trace);
  EXPECT_EQ(curve.regret.back(), 0.0);
  for (std::size_t k = 1; k < curve.oracle_cum.size(); ++k) EXPECT_GE(curve.oracle_cum[k], curve.oracle_cum[k - 1]);
}

TEST(Regret, EarlyPeakerCrossover) {
  SyntheticParams sp;
  sp.horizon = 20000;
  auto inst = make_synthetic_instance(sp);
  // Direct prefix-sum intersection: first t where the late path collects more.
  long double late = 0;
  PullCount t_star = 0;
  for (PullCount t = 1; t <= sp.horizon; ++t) {
    late += inst.arms[0].mu(t) + 0.8L;
    if (late > 1.6L * t) {
      t_star = t;
      break;
    }
  }
  ASSERT_GT(t_star, 1);
  auto table = oracle_table(inst, inst.horizon);
  EXPECT_EQ(oracle_switches(table), (std::vector<PullCount>{t_star}));

  std::vector<SuperArm> early(static_cast<std::size_t>(inst.horizon), SuperArm{2, 3});
  auto curve = regret_curve(inst, early, table);
  for (PullCount t = 1; t < t_star; ++t) ASSERT_EQ(curve.regret[t - 1], 0.0) << t;
  EXPECT_GT(curve.regret.back(), 0.0);

  // The late path's own regret rises, then falls back to zero.
  std::vector<SuperArm> lateplay(static_cast<std::size_t>(inst.horizon), SuperArm{0, 1});
  auto dip = regret_curve(inst, lateplay, table);
  EXPECT_GT(*std::max_element(dip.regret.begin(), dip.regret.end()), 100.0);
  EXPECT_EQ(dip.regret.back(), 0.0);
}

TEST(Regret, RejectsBadTraces) {
  auto inst = two_singletons(3);
  std::vector<SuperArm> bad{{0}, {0, 1}};
  EXPECT_THROW(regret_curve(inst, bad), InvalidActionError);
  std::vector<SuperArm> longer(4, SuperArm{0});
  EXPECT_THROW(regret_curve(inst, longer), ParameterError);
}

TEST(Regret, ExpectedRewardFollowsPullCounts) {
  auto inst = two_singletons(5);
  std::vector<SuperArm> trace{{1}, {0}, {1}, {1}, {1}};
  auto c = regret_curve(inst, trace);
  std::vector<double> expected{0.3, 0.5, 0.6, 0.9, 1.0};
  for (std::size_t k = 0; k < expected.size(); ++k) EXPECT_NEAR(c.expected_reward[k], expected[k], 1e-15);
  EXPECT_NEAR(c.regret[4], (0.3 + 0.6 + 0.9 + 1.0 + 1.0) - 3.3, 1e-12);
}

TEST(Upsilon, HandExample) {
  BanditInstance inst;
  inst.horizon = 10;
  inst.arms.emplace_back(PowerLawSaturating{0.0, 1.0, 1.0, 0, std::nullopt}, 10);
  inst.family = SuperArmFamily(ExplicitSubsets{{{0}}}, Sense::Maximize);
  EXPECT_NEAR(cumulative_increment(inst, 4, 1.0), 13.0 / 12.0, 1e-15);
  EXPECT_NEAR(cumulative_increment(power_envelope(1.0), 4, 1.0), 13.0 / 12.0, 1e-15);
  EXPECT_EQ(cumulative_increment(inst, 1, 0.5), 0.0);
  EXPECT_THROW(cumulative_increment(inst, 4, 1.5), ParameterError);
}

TEST(Upsilon, StationaryIsZero) {
  auto inst = two_singletons();
  inst.arms[1] = RisingFunction(Constant{0.9}, 10);
  for (double q : {0.0, 0.3, 1.0}) EXPECT_EQ(cumulative_increment(inst, 50, q), 0.0);
}

TEST(Upsilon, MonotoneInMAndQ) {
  auto env = power_envelope(1.1);
  double prev = 0;
  for (PullCount m = 1; m < 300; m += 7) {
    double v = cumulative_increment(env, m, 0.6);
    EXPECT_GE(v, prev);
    prev = v;
  }
  prev = INFINITY;
  for (int k = 0; k <= 20; ++k) {
    double v = cumulative_increment(env, 1000, k / 20.0);
    EXPECT_LE(v, prev);
    prev = v;
  }
}

TEST(Upsilon, MatchesLongDoubleSum) {
  for (double c : {0.5, 1.1, 2.0}) {
    for (PullCount m : {2, 10, 1000, 100000}) {
      EXPECT_NEAR(cumulative_increment(power_envelope(c), m, 1.0), static_cast<double>(power_partial_sum(c, m, 1.0)),
                  1e-9);
    }
  }
}

TEST(BruteForce, TwoSingletons) {
  auto r = brute_force_optimal(two_singletons(), 4);
  EXPECT_NEAR(r.best_value, 2.8, 1e-12);
  EXPECT_EQ(r.best_constant, (SuperArm{1}));
  EXPECT_EQ(r.best_value, r.best_constant_value);
  EXPECT_EQ(r.witness, (std::vector<std::size_t>{0, 4}));
}

TEST(BruteForce, SmallKmaxBeatsConstant) {
  auto r = brute_force_optimal(small_kmax(), 10);
  EXPECT_NEAR(r.best_constant_value, 8.9, 1e-12);
  EXPECT_EQ(r.best_constant, (SuperArm{0, 1}));
  EXPECT_GE(r.best_value, 9.1 - 1e-12);
  EXPECT_GT(r.best_value, r.best_constant_value + 0.1);
  EXPECT_TRUE(r.witness_is_sequence);
}

TEST(BruteForce, SingleSuperArm) {
  auto inst = two_singletons();
  inst.family = SuperArmFamily(ExplicitSubsets{{{1}}}, Sense::Maximize);
  auto r = brute_force_optimal(inst, 6);
  EXPECT_EQ(r.best_value, r.best_constant_value);
}

TEST(BruteForce, Caps) {
  auto inst = two_singletons(20);
  EXPECT_THROW(brute_force_optimal(inst, 11), ParameterError);
  BanditInstance wide;
  wide.horizon = 5;
  std::vector<SuperArm> subsets;
  for (int i = 0; i < 7; ++i) {
    wide.arms.emplace_back(Constant{0.1}, 5);
    subsets.push_back({i});
  }
  wide.family = SuperArmFamily(ExplicitSubsets{subsets}, Sense::Maximize);
  EXPECT_THROW(brute_force_optimal(wide, 3), ParameterError);
}

TEST(BruteForce, ConstantOptimalOnRandomConcaveInstances) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const int K = 2 + static_cast<int>(rng() % 3);
    const PullCount T = 2 + static_cast<PullCount>(rng() % 7);
    BanditInstance inst;
    inst.horizon = T;
    inst.concave_certified = true;
    for (int i = 0; i < K; ++i) inst.arms.emplace_back(Tabulated{concave_table(T, rng)}, T);
    std::vector<SuperArm> subsets;
    while (subsets.size() < 1 + rng() % 4) {
      SuperArm s;
      for (int i = 0; i < K; ++i) {
        if (rng() % 2) s.push_back(i);
      }
      if (!s.empty() && std::find(subsets.begin(), subsets.end(), s) == subsets.end()) subsets.push_back(s);
    }
    inst.family = SuperArmFamily(ExplicitSubsets{subsets}, Sense::Maximize);
    ASSERT_TRUE(validate_instance(inst).valid());
    auto r = brute_force_optimal(inst, T);
    double best_constant = -1;
    for (const auto& s : subsets) {
      double v = 0;
      for (int a : s) {
        for (PullCount n = 1; n <= T; ++n) v += inst.arms[a].mu(n);
      }
      best_constant = std::max(best_constant, v);
    }
    EXPECT_EQ(r.best_value, best_constant) << trial;
  }
}

TEST(Bounds, ConstantTerm) {
  auto u = upper_bound_terms(1000, 3, 2, 0.5, 0.25, 0.01, power_envelope(1.1));
  EXPECT_NEAR(u.term_const, 6 + 2 * std::numbers::pi, 1e-12);
  EXPECT_NEAR(u.term_const, 12.2832, 5e-5);
}

TEST(Bounds, IndependentFormula) {
  const PullCount T = 50000;
  const int K = 4, L = 2;
  const double q = 0.35, eps = 0.2, sigma = 0.05, c = 1.3;
  auto u = upper_bound_terms(T, K, L, q, eps, sigma, power_envelope(c));
  const PullCount M = static_cast<PullCount>((1 - 2 * eps) * L * T / K);
  EXPECT_EQ(u.upsilon_m, M);
  const double ups = static_cast<double>(power_partial_sum(c, M, q));
  EXPECT_NEAR(u.upsilon, ups, 1e-9 * ups);
  EXPECT_NEAR(u.term_rising, K * std::pow(double(T), q) / (1 - 2 * eps) * ups, 1e-9 * u.term_rising);
  const double lg = 6 * std::log(4.0 * T);
  const double np = std::pow(2 * sigma * T, 2.0 / 3) * std::pow(lg, 1.0 / 3) / eps;
  EXPECT_NEAR(u.n_prime, np, 1e-9 * np);
  const double noise = K * (np + 2 * sigma * T * std::sqrt(lg / (eps * eps * eps)) * 2 / std::sqrt(np));
  EXPECT_NEAR(u.term_noise, noise, 1e-9 * noise);
}

TEST(Bounds, StationaryHasNoRisingTerm) {
  auto inst = two_singletons();
  inst.arms[1] = RisingFunction(Constant{0.9}, 10);
  for (double q : {0.05, 0.5, 1.0}) {
    EXPECT_EQ(upper_bound_terms(10, 2, 1, q, 0.25, 0.01, instance_envelope(inst)).term_rising, 0.0);
  }
  EXPECT_EQ(upper_bound_terms(10, 2, 1, 0.5, 0.25, 0.0, instance_envelope(inst)).term_noise, 0.0);
}

TEST(Bounds, FiniteNonnegativeMonotoneInT) {
  double prev_total = 0, prev_lower = 0;
  for (PullCount T : {10, 100, 1000, 10000, 100000}) {
    BoundQuery q;
    q.horizon = T;
    q.k = 3;
    q.l = 2;
    auto r = bound_report(q);
    EXPECT_EQ(r.sweep.size(), 21u);
    for (const auto& u : r.sweep) {
      EXPECT_TRUE(std::isfinite(u.total()));
      EXPECT_GE(u.term_const, 0);
      EXPECT_GE(u.term_rising, 0);
      EXPECT_GE(u.term_noise, 0);
      EXPECT_LE(r.best.total(), u.total());
    }
    EXPECT_GE(r.best.total(), prev_total);
    EXPECT_GE(*r.lower.constrained, prev_lower);
    prev_total = r.best.total();
    prev_lower = *r.lower.constrained;
  }
}

TEST(Bounds, LowerBounds) {
  auto b = lower_bound_curves(3200, 1, 1.5);
  EXPECT_DOUBLE_EQ(b.unconstrained, 100.0);
  ASSERT_TRUE(b.constrained);
  EXPECT_NEAR(*b.constrained, std::sqrt(3200.0), 1e-9);
  EXPECT_FALSE(lower_bound_curves(3200, 1, 0.9).constrained);
  EXPECT_DOUBLE_EQ(lower_bound_curves(3200, 3, 1.5).unconstrained, 300.0);
}

TEST(Bounds, ExponentTable) {
  EXPECT_DOUBLE_EQ(lower_exponent(1.5), 0.5);
  EXPECT_DOUBLE_EQ(lower_exponent(0.5), 1.0);
  EXPECT_NEAR(lower_exponent(1.2), 0.8, 1e-15);
  EXPECT_DOUBLE_EQ(upper_exponent(1.2), 1.0 / 1.2);
  EXPECT_DOUBLE_EQ(upper_exponent(2.0), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(upper_exponent(0.8), 1.0);
  double prev = 1.0;
  for (const auto& row : exponent_table({0.5, 0.9, 1.0, 1.1, 1.3, 1.5, 2.0, 3.0})) {
    EXPECT_LE(row.lower, prev);
    EXPECT_LE(row.lower, row.upper);
    prev = row.lower;
  }
}

TEST(Bounds, RisingTermGrowthNearOneOverC) {
  // With c = 1.1 the q-optimised rising term grows like T^(1/c) up to logs.
  auto best_rising = [](PullCount T) {
    double best = INFINITY;
    for (int k = 0; k <= 100; ++k) {
      best = std::min(best, upper_bound_terms(T, 1, 1, k / 100.0, 0.25, 0.0, power_envelope(1.1)).term_rising);
    }
    return best;
  };
  const double slope = std::log(best_rising(1000000) / best_rising(10000)) / std::log(100.0);
  EXPECT_GT(slope, 1.0 / 1.1 - 0.05);
  EXPECT_LT(slope, 1.0 / 1.1 + 0.1);
}

TEST(Bounds, ReportSerialisation) {
  BoundQuery q;
  q.horizon = 3200;
  q.c = 1.5;
  auto r = bound_report(q);
  auto j = bound_report_json(r);
  EXPECT_DOUBLE_EQ(j["lower_unconstrained"].get<double>(), 100.0);
  auto csv = bound_report_csv(r);
  EXPECT_EQ(csv.rfind("parameter,value\n", 0), 0u);
  EXPECT_NE(csv.find("lower_unconstrained,100\n"), std::string::npos);
}
