#include "crlab/generators.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "crlab/errors.hpp"

namespace crlab {
namespace {

SuperArmFamily product_family(int replication) {
  // Super arm k picks arm i or L+i in slot i according to bit i of k.
  std::vector<SuperArm> subsets;
  const int L = replication;
  for (long mask = 0; mask < (1L << L); ++mask) {
    SuperArm s;
    for (int i = 0; i < L; ++i) s.push_back((mask >> i) & 1 ? L + i : i);
    std::sort(s.begin(), s.end());
    subsets.push_back(std::move(s));
  }
  return SuperArmFamily(ExplicitSubsets{std::move(subsets)}, Sense::Maximize);
}

void check_replication(int replication) {
  if (replication < 1) throw ParameterError("replication factor L must be >= 1");
  if (replication > 16) throw ParameterError("replication factor L above 16 gives more than 65536 super arms");
}

}  // namespace

BanditInstance make_synthetic_instance(const SyntheticParams& p) {
  if (!(p.c > 0.0)) throw ParameterError("synthetic: exponent c must be > 0");
  if (p.horizon < 1) throw ParameterError("synthetic: horizon must be >= 1");
  if (!(p.lb_end > p.lb_start)) {
    throw ParameterError(fmt::format("synthetic: late-bloomer target {} is not above its start {}",
                                     p.lb_end, p.lb_start));
  }
  if (p.lb_start < 0.0 || p.lb_end > 1.0) throw ParameterError("synthetic: late-bloomer range must lie in [0,1]");
  if (p.ep_level < 0.0 || p.ep_level > 1.0) throw ParameterError("synthetic: early-peaker level must lie in [0,1]");
  if (p.sigma < 0.0) throw ParameterError("synthetic: sigma must be >= 0");

  BanditInstance inst;
  std::vector<ArmIndex> late = p.late_bloomers;
  if (p.family) {
    if (late.empty()) throw ParameterError("synthetic: custom family needs at least one late bloomer");
    inst.family = *p.family;
  } else if (p.graph == "two_path") {
    DagShortestPath g;
    g.nodes = 4;
    g.source = 0;
    g.sink = 3;
    g.edges = {{0, 1, 0}, {1, 3, 1}, {0, 2, 2}, {2, 3, 3}};
    inst.family = SuperArmFamily(std::move(g), Sense::Minimize);
    if (late.empty()) late = {0};
  } else {
    throw ParameterError(fmt::format("synthetic: unknown graph template '{}'", p.graph));
  }

  const std::size_t K = inst.family.arms_referenced();
  double norm = 0.0;
  for (PullCount m = 1; m <= p.horizon; ++m) norm += std::pow(static_cast<double>(m), -p.c);
  const double amplitude = (p.lb_end - p.lb_start) / norm;

  for (std::size_t i = 0; i < K; ++i) {
    bool is_late = std::find(late.begin(), late.end(), static_cast<ArmIndex>(i)) != late.end();
    if (is_late) {
      inst.arms.emplace_back(PowerLawSaturating{p.lb_start, amplitude, p.c, 0, std::nullopt}, p.horizon);
    } else {
      inst.arms.emplace_back(Constant{p.ep_level}, p.horizon);
    }
  }
  for (ArmIndex a : late) {
    if (a < 0 || static_cast<std::size_t>(a) >= K) throw ParameterError("synthetic: late bloomer index out of range");
  }

  inst.name = "synthetic";
  inst.sigma = p.sigma;
  inst.horizon = p.horizon;
  inst.concave_certified = true;
  inst.metadata["generator"] = "synthetic";
  inst.metadata["late_bloomer_amplitude"] = fmt::format("{:.17g}", amplitude);
  inst.metadata["c"] = fmt::format("{}", p.c);
  return inst;
}

std::pair<BanditInstance, BanditInstance> make_lower_bound_pair(PullCount horizon, int replication) {
  if (horizon < 3) throw ParameterError("lower-bound pair: horizon must be >= 3");
  check_replication(replication);
  const int L = replication;
  const double slope = 3.0 / (2.0 * static_cast<double>(horizon));

  auto build = [&](double plateau, const char* tag) {
    BanditInstance inst;
    inst.name = fmt::format("lower_bound_{}", tag);
    inst.horizon = horizon;
    inst.sigma = 0.0;
    inst.concave_certified = true;
    for (int i = 0; i < L; ++i) inst.arms.emplace_back(Constant{0.5}, horizon);
    for (int i = 0; i < L; ++i) inst.arms.push_back(RisingFunction::saturating_ramp(slope, plateau, horizon));
    inst.family = product_family(L);
    const auto& ramp = std::get<PiecewiseLinearSaturating>(inst.arms[L].shape());
    inst.metadata["generator"] = "lower_bound_pair";
    inst.metadata["breakpoint"] = std::to_string(ramp.kink);
    inst.metadata["breakpoint_rounding"] =
        horizon % 3 == 0 ? "exact" : "rounded down so the ramp stays within its plateau";
    return inst;
  };
  return {build(1.0, "A"), build(0.5, "B")};
}

ConstrainedPair make_constrained_pair(PullCount horizon, double c, int replication) {
  if (!(c > 1.0 && c < 2.0)) throw ParameterError("constrained pair: c must lie in (1, 2)");
  if (horizon < 4) throw ParameterError("constrained pair: horizon must be >= 4");
  check_replication(replication);
  const int L = replication;

  const PowerLawSaturating raw_shape{0.0, 1.0, c, 1, std::nullopt};
  const RisingFunction raw(raw_shape, horizon);
  const double scale = 1.0 / std::max(1.0, raw.mu(horizon));
  const PowerLawSaturating scaled_shape{0.0, scale, c, 1, std::nullopt};
  const RisingFunction mu(scaled_shape, horizon);

  const double a = std::pow(2.0 - c, 1.0 / (c - 1.0));
  const PullCount P = std::clamp<PullCount>(std::llround(a * static_cast<double>(horizon)), 1, horizon - 1);
  const double muP = mu.mu(P);
  const double Pd = static_cast<double>(P);
  const double case_b_tail = mu.cumulative(horizon) - mu.cumulative(horizon - P);
  const double FP = mu.cumulative(P);

  // Case-A bound at s = 0 minus case-B bound at s = P, per pull of the
  // breakpoint (divided by 2P); decreasing in epsilon.
  auto residual = [&](double eps) {
    return (((muP - eps) * Pd - FP) - (case_b_tail - (muP - eps) * Pd)) / (2.0 * Pd);
  };
  double lo = 0.0, hi = muP;
  double r_lo = residual(lo), r_hi = residual(hi);
  if (!(r_lo > 0.0 && r_hi < 0.0)) {
    throw ConstructionError(fmt::format(
        "constrained pair: balance equation has no root in (0, mu(P)) (residuals {} and {})", r_lo, r_hi));
  }
  double eps = 0.5 * (lo + hi);
  double r = residual(eps);
  for (int iter = 0; iter < 200 && std::abs(r) > 1e-12; ++iter) {
    if (r > 0.0) lo = eps; else hi = eps;
    eps = 0.5 * (lo + hi);
    r = residual(eps);
  }
  if (std::abs(r) > 1e-12 || !(eps > 0.0 && eps < muP)) {
    throw ConstructionError(fmt::format("constrained pair: epsilon solve failed (eps={}, residual={})", eps, r));
  }

  auto build = [&](bool capped, const char* tag) {
    BanditInstance inst;
    inst.name = fmt::format("constrained_{}", tag);
    inst.horizon = horizon;
    inst.sigma = 0.0;
    inst.concave_certified = true;
    for (int i = 0; i < L; ++i) inst.arms.emplace_back(Constant{muP - eps}, horizon);
    for (int i = 0; i < L; ++i) {
      PowerLawSaturating shape = scaled_shape;
      if (capped) shape.cap_pull = P;
      inst.arms.emplace_back(shape, horizon);
    }
    inst.family = product_family(L);
    inst.metadata["generator"] = "constrained_pair";
    inst.metadata["breakpoint"] = std::to_string(P);
    inst.metadata["breakpoint_exact"] = fmt::format("{:.17g}", a * static_cast<double>(horizon));
    inst.metadata["epsilon"] = fmt::format("{:.17g}", eps);
    inst.metadata["scale"] = fmt::format("{:.17g}", scale);
    return inst;
  };

  ConstrainedPair out{build(false, "A"), build(true, "B"), P, eps, scale, r};
  return out;
}

BanditInstance make_kmax_counterexample(PullCount horizon) {
  if (horizon < 1000) throw ParameterError("kmax counterexample needs horizon >= 1000");
  BanditInstance inst;
  inst.name = "kmax_counterexample";
  inst.horizon = horizon;
  inst.sigma = 0.0;
  inst.reward = RewardModel::KMax;
  inst.concave_certified = true;

  // mu_1(n) = 10 n / T below T/10 and 1 from T/10 on.
  const double T = static_cast<double>(horizon);
  const PullCount ramp_end = static_cast<PullCount>(std::ceil(T / 10.0)) - 1;
  inst.arms.emplace_back(PiecewiseLinearSaturating{10.0 / T, ramp_end, 1.0}, horizon);
  inst.arms.emplace_back(PiecewiseLinearSaturating{0.1, 1, 0.9}, horizon);
  inst.arms.emplace_back(Constant{0.5}, horizon);
  inst.family = SuperArmFamily(ExplicitSubsets{{{0, 1}, {0, 2}, {1, 2}}}, Sense::Maximize);
  inst.metadata["generator"] = "kmax_counterexample";
  inst.metadata["reward"] = "kmax (non-additive)";
  return inst;
}

std::vector<GeneratorInfo> generator_catalog() {
  return {
      {"synthetic", "c, horizon, lb_start, lb_end, ep_level, sigma, graph",
       "late bloomer (power law) and early peakers on a two-path DAG or a custom family"},
      {"lower_bound_pair", "horizon, replication, variant (A|B)",
       "constant 1/2 arms against ramps saturating at 1 (A) or 1/2 (B)"},
      {"constrained_pair", "horizon, c, replication, variant (A|B)",
       "growth-constrained pair with increments (n+1)^-c and balanced epsilon"},
      {"kmax_counterexample", "horizon (>= 1000)",
       "non-additive K-max instance where the best constant super arm is not optimal"},
  };
}

}  // namespace crlab
