#include "crlab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "crlab/errors.hpp"
#include "crlab/oracle.hpp"

namespace crlab {

IncrementEnvelope power_envelope(double c) {
  return [c](PullCount l) { return std::pow(static_cast<double>(l + 1), -c); };
}

IncrementEnvelope instance_envelope(const BanditInstance& inst) {
  return [&inst](PullCount l) {
    double best = 0.0;
    for (const auto& f : inst.arms) {
      if (l < f.horizon()) best = std::max(best, f.gamma(l));
    }
    return best;
  };
}

UpperBoundTerms upper_bound_terms(PullCount horizon, int k, int l, double q, double epsilon, double sigma,
                                  const IncrementEnvelope& envelope) {
  if (horizon < 1) throw ParameterError("T must be >= 1");
  if (k < 1 || l < 1 || l > k) throw ParameterError("need 1 <= L <= K");
  if (!(q >= 0.0 && q <= 1.0)) throw ParameterError("q must lie in [0, 1]");
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw ParameterError("epsilon must lie in (0, 1/2)");
  if (sigma < 0.0) throw ParameterError("sigma must be >= 0");

  const double t = static_cast<double>(horizon);
  const double kd = k;
  const double ld = l;
  UpperBoundTerms u;
  u.q = q;
  u.term_const = (2.0 + ld * std::numbers::pi / 3.0) * kd;
  u.upsilon_m = std::max<PullCount>(1, static_cast<PullCount>(std::floor((1.0 - 2.0 * epsilon) * ld * t / kd)));
  u.upsilon = cumulative_increment(envelope, u.upsilon_m, q);
  u.term_rising = kd * std::pow(t, q) / (1.0 - 2.0 * epsilon) * u.upsilon;
  if (sigma > 0.0) {
    const double log_term = 6.0 * std::log(4.0 * t);
    u.n_prime = std::pow(2.0 * sigma * t, 2.0 / 3.0) * std::cbrt(log_term) / epsilon;
    u.term_noise =
        kd * (u.n_prime + 2.0 * sigma * t * std::sqrt(log_term / (epsilon * epsilon * epsilon)) * 2.0 /
                              std::sqrt(u.n_prime));
  }
  return u;
}

LowerBounds lower_bound_curves(PullCount horizon, int l, double c) {
  if (horizon < 1 || l < 1) throw ParameterError("need T >= 1 and L >= 1");
  const double t = static_cast<double>(horizon);
  LowerBounds b;
  b.unconstrained = l * t / 32.0;
  if (c > 1.0) b.constrained = std::max(l * std::sqrt(t), l * std::pow(t, 2.0 - c));
  return b;
}

double lower_exponent(double c) { return c <= 1.0 ? 1.0 : std::max(0.5, 2.0 - c); }

double upper_exponent(double c) {
  if (c <= 1.0) return 1.0;
  return std::min(1.0, std::max(2.0 / 3.0, 1.0 / c));
}

std::vector<ExponentRow> exponent_table(const std::vector<double>& cs) {
  std::vector<ExponentRow> rows;
  for (double c : cs) rows.push_back({c, lower_exponent(c), upper_exponent(c)});
  return rows;
}

BoundReport bound_report(const BoundQuery& query) {
  if (!(query.c > 0.0)) throw ParameterError("c must be > 0");
  BoundReport r;
  r.query = query;
  if (r.query.q_grid.empty()) {
    for (int k = 0; k <= 20; ++k) r.query.q_grid.push_back(k / 20.0);
  }
  const auto envelope = power_envelope(query.c);
  for (double q : r.query.q_grid) {
    r.sweep.push_back(upper_bound_terms(query.horizon, query.k, query.l, q, query.epsilon, query.sigma, envelope));
  }
  r.best = *std::min_element(r.sweep.begin(), r.sweep.end(),
                             [](const auto& a, const auto& b) { return a.total() < b.total(); });
  r.lower = lower_bound_curves(query.horizon, query.l, query.c);
  r.exponents = {query.c, lower_exponent(query.c), upper_exponent(query.c)};
  return r;
}

namespace {

Json terms_json(const UpperBoundTerms& u) {
  return {{"q", u.q},
          {"upsilon_m", u.upsilon_m},
          {"upsilon", u.upsilon},
          {"term_const", u.term_const},
          {"term_rising", u.term_rising},
          {"n_prime", u.n_prime},
          {"term_noise", u.term_noise},
          {"total", u.total()}};
}

}  // namespace

Json bound_report_json(const BoundReport& r) {
  Json j;
  j["params"] = {{"T", r.query.horizon}, {"K", r.query.k},          {"L", r.query.l},
                 {"c", r.query.c},       {"eps", r.query.epsilon},  {"sigma", r.query.sigma}};
  j["upper"] = terms_json(r.best);
  j["upper"]["note"] = "noise term uses explicit proof constants for an asymptotic bound";
  j["sweep"] = Json::array();
  for (const auto& u : r.sweep) j["sweep"].push_back(terms_json(u));
  j["lower_unconstrained"] = r.lower.unconstrained;
  j["lower_constrained"] = r.lower.constrained ? Json(*r.lower.constrained) : Json(nullptr);
  j["lower_exponent"] = r.exponents.lower;
  j["upper_exponent"] = r.exponents.upper;
  return j;
}

std::string bound_report_csv(const BoundReport& r) {
  std::string out = "parameter,value\n";
  auto row = [&](const std::string& key, double v) { out += fmt::format("{},{:.17g}\n", key, v); };
  row("T", static_cast<double>(r.query.horizon));
  row("K", r.query.k);
  row("L", r.query.l);
  row("c", r.query.c);
  row("eps", r.query.epsilon);
  row("sigma", r.query.sigma);
  row("q", r.best.q);
  row("upsilon_m", static_cast<double>(r.best.upsilon_m));
  row("upsilon", r.best.upsilon);
  row("term_const", r.best.term_const);
  row("term_rising", r.best.term_rising);
  row("n_prime", r.best.n_prime);
  row("term_noise", r.best.term_noise);
  row("upper_total", r.best.total());
  row("lower_unconstrained", r.lower.unconstrained);
  if (r.lower.constrained) row("lower_constrained", *r.lower.constrained);
  row("lower_exponent", r.exponents.lower);
  row("upper_exponent", r.exponents.upper);
  for (const auto& u : r.sweep) row(fmt::format("term_rising@q={}", u.q), u.term_rising);
  return out;
}

}  // namespace crlab
