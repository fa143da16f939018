#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "crlab/instance.hpp"
#include "crlab/instance_json.hpp"

namespace crlab {

using IncrementEnvelope = std::function<double(PullCount)>;

/// max_l gamma(l) envelope of the power family, (l+1)^(-c).
IncrementEnvelope power_envelope(double c);

/// Maximal increment over the arms of an instance (zero past each horizon).
IncrementEnvelope instance_envelope(const BanditInstance& inst);

struct UpperBoundTerms {
  double q = 0.0;
  PullCount upsilon_m = 0;  // floor((1 - 2 eps) L T / K)
  double upsilon = 0.0;
  double term_const = 0.0;
  double term_rising = 0.0;
  double n_prime = 0.0;
  double term_noise = 0.0;  // constant-explicit variant of an asymptotic term

  double total() const { return term_const + term_rising + term_noise; }
};

/// Upper-bound pieces for CRUCB at horizon T with K base arms and super arms
/// of size at most L. Throws ParameterError for q outside [0,1], eps outside
/// (0, 1/2) or nonpositive sizes.
UpperBoundTerms upper_bound_terms(PullCount horizon, int k, int l, double q, double epsilon, double sigma,
                                  const IncrementEnvelope& envelope);

struct LowerBounds {
  double unconstrained = 0.0;            // L T / 32
  std::optional<double> constrained;     // max(L sqrt(T), L T^(2-c)), c > 1 only
};

LowerBounds lower_bound_curves(PullCount horizon, int l, double c);

/// Regret-rate exponents in T for the power family with parameter c.
double lower_exponent(double c);  // 1 for c <= 1, max(1/2, 2 - c) otherwise
double upper_exponent(double c);  // min(1, max(2/3, 1/c))

struct ExponentRow {
  double c = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

std::vector<ExponentRow> exponent_table(const std::vector<double>& cs);

struct BoundQuery {
  PullCount horizon = 200000;
  int k = 1;
  int l = 1;
  double c = 1.1;
  double epsilon = 0.25;
  double sigma = 0.01;
  std::vector<double> q_grid;  // empty: 0, 0.05, ..., 1
};

struct BoundReport {
  BoundQuery query;
  std::vector<UpperBoundTerms> sweep;  // one entry per q
  UpperBoundTerms best;                // smallest total over the sweep
  LowerBounds lower;
  ExponentRow exponents;
};

/// Bounds for the power envelope (l+1)^(-c).
BoundReport bound_report(const BoundQuery& query);

Json bound_report_json(const BoundReport& report);

/// Two-column CSV "parameter,value".
std::string bound_report_csv(const BoundReport& report);

}  // namespace crlab
