#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace crlab {

using PullCount = std::int64_t;

/// mu(n) = value for every n.
struct Constant {
  double value = 0.0;
};

/// mu(n) = slope * n for n <= kink, plateau afterwards.
struct PiecewiseLinearSaturating {
  double slope = 0.0;
  PullCount kink = 0;
  double plateau = 0.0;
};

/// mu(n) = base + amplitude * sum_{m=1..n} (m + shift)^(-exponent).
///
/// With `cap_pull` set, the function freezes at mu(cap_pull) for larger n.
struct PowerLawSaturating {
  double base = 0.0;
  double amplitude = 1.0;
  double exponent = 1.0;
  int shift = 0;
  std::optional<PullCount> cap_pull;
};

/// mu(n) = values[n - 1]; the horizon is values.size().
struct Tabulated {
  std::vector<double> values;
};

using RisingShape = std::variant<Constant, PiecewiseLinearSaturating, PowerLawSaturating, Tabulated>;

/// A mean-outcome function over pull counts 1..horizon.
///
/// Values and prefix sums are materialised once at construction, so copies are
/// cheap and instances can be shared read-only between threads. Construction
/// does not enforce the rising/concave/[0,1] properties; `validate_instance`
/// reports on them.
class RisingFunction {
 public:
  RisingFunction(RisingShape shape, PullCount horizon);

  /// Piecewise-linear ramp min(slope * n, plateau) with the kink placed at the
  /// last pull below the plateau.
  static RisingFunction saturating_ramp(double slope, double plateau, PullCount horizon);

  /// mu(n); throws RangeError outside [1, horizon].
  double mu(PullCount n) const;

  /// gamma(n) = mu(n+1) - mu(n) for n in [1, horizon-1]. Closed-form shapes
  /// return the exact increment instead of a difference of rounded values.
  double gamma(PullCount n) const;

  /// F(n) = sum_{m=1..n} mu(m); F(0) = 0; throws RangeError for n > horizon.
  double cumulative(PullCount n) const;

  PullCount horizon() const { return horizon_; }
  const RisingShape& shape() const { return shape_; }
  std::span<const double> values() const { return tables_->values; }
  std::string describe() const;

 private:
  struct Tables {
    std::vector<double> values;
    std::vector<double> prefix;  // prefix[n] = F(n)
  };

  RisingShape shape_;
  PullCount horizon_;
  std::shared_ptr<const Tables> tables_;
};

}  // namespace crlab
