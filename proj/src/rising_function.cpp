#include "crlab/rising_function.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "crlab/errors.hpp"

namespace crlab {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::vector<double> materialise(const RisingShape& shape, PullCount horizon) {
  std::vector<double> values(static_cast<std::size_t>(horizon));
  std::visit(
      Overloaded{
          [&](const Constant& c) { std::fill(values.begin(), values.end(), c.value); },
          [&](const PiecewiseLinearSaturating& p) {
            for (PullCount n = 1; n <= horizon; ++n) {
              values[n - 1] = n <= p.kink ? p.slope * static_cast<double>(n) : p.plateau;
            }
          },
          [&](const PowerLawSaturating& p) {
            double partial = 0.0;
            for (PullCount n = 1; n <= horizon; ++n) {
              if (!p.cap_pull || n <= *p.cap_pull) {
                partial += std::pow(static_cast<double>(n + p.shift), -p.exponent);
                values[n - 1] = p.base + p.amplitude * partial;
              } else {
                values[n - 1] = values[n - 2];
              }
            }
          },
          [&](const Tabulated& t) { std::copy(t.values.begin(), t.values.end(), values.begin()); },
      },
      shape);
  return values;
}

}  // namespace

RisingFunction::RisingFunction(RisingShape shape, PullCount horizon)
    : shape_(std::move(shape)), horizon_(horizon) {
  if (const auto* t = std::get_if<Tabulated>(&shape_)) {
    if (t->values.empty()) throw ParameterError("tabulated function needs at least one value");
    if (horizon_ != static_cast<PullCount>(t->values.size())) {
      throw ParameterError(fmt::format("tabulated function has {} values but horizon {}",
                                       t->values.size(), horizon_));
    }
  }
  if (horizon_ < 1) throw ParameterError("rising function horizon must be >= 1");
  if (const auto* p = std::get_if<PowerLawSaturating>(&shape_)) {
    if (p->shift < 0) throw ParameterError("power-law shift must be >= 0");
    if (p->cap_pull && *p->cap_pull < 1) throw ParameterError("power-law cap must be >= 1");
  }
  if (const auto* p = std::get_if<PiecewiseLinearSaturating>(&shape_)) {
    if (p->kink < 0) throw ParameterError("piecewise-linear kink must be >= 0");
  }

  auto tables = std::make_shared<Tables>();
  tables->values = materialise(shape_, horizon_);
  tables->prefix.resize(tables->values.size() + 1);
  tables->prefix[0] = 0.0;
  for (std::size_t n = 0; n < tables->values.size(); ++n) {
    tables->prefix[n + 1] = tables->prefix[n] + tables->values[n];
  }
  for (double v : tables->values) {
    if (!std::isfinite(v)) throw ParameterError("rising function produced a non-finite value");
  }
  tables_ = std::move(tables);
}

RisingFunction RisingFunction::saturating_ramp(double slope, double plateau, PullCount horizon) {
  if (!(slope > 0.0)) throw ParameterError("ramp slope must be positive");
  auto kink = static_cast<PullCount>(std::floor(plateau / slope));
  while (slope * static_cast<double>(kink + 1) <= plateau) ++kink;
  while (kink > 0 && slope * static_cast<double>(kink) > plateau) --kink;
  kink = std::clamp<PullCount>(kink, 0, horizon);
  return RisingFunction(PiecewiseLinearSaturating{slope, kink, plateau}, horizon);
}

double RisingFunction::mu(PullCount n) const {
  if (n < 1 || n > horizon_) {
    throw RangeError(fmt::format("pull count {} outside [1, {}]", n, horizon_));
  }
  return tables_->values[static_cast<std::size_t>(n - 1)];
}

double RisingFunction::gamma(PullCount n) const {
  if (n < 1 || n >= horizon_) {
    throw RangeError(fmt::format("increment index {} outside [1, {}]", n, horizon_ - 1));
  }
  if (const auto* p = std::get_if<PowerLawSaturating>(&shape_)) {
    if (p->cap_pull && n >= *p->cap_pull) return 0.0;
    return p->amplitude * std::pow(static_cast<double>(n + 1 + p->shift), -p->exponent);
  }
  if (std::holds_alternative<Constant>(shape_)) return 0.0;
  return mu(n + 1) - mu(n);
}

double RisingFunction::cumulative(PullCount n) const {
  if (n < 0 || n > horizon_) {
    throw RangeError(fmt::format("prefix length {} outside [0, {}]", n, horizon_));
  }
  return tables_->prefix[static_cast<std::size_t>(n)];
}

std::string RisingFunction::describe() const {
  return std::visit(
      Overloaded{
          [](const Constant& c) { return fmt::format("constant({})", c.value); },
          [](const PiecewiseLinearSaturating& p) {
            return fmt::format("ramp(slope={}, kink={}, plateau={})", p.slope, p.kink, p.plateau);
          },
          [](const PowerLawSaturating& p) {
            return fmt::format("power_law(base={}, amplitude={}, exponent={}, shift={})", p.base,
                               p.amplitude, p.exponent, p.shift);
          },
          [](const Tabulated& t) { return fmt::format("tabulated({} values)", t.values.size()); },
      },
      shape_);
}

}  // namespace crlab
