#pragma once

// Loss families for functional M-estimation.
//
// Every family is evaluated on a nonnegative argument (a residual norm):
//   rho(x)    the loss, rho(0) = 0, continuous and non-decreasing
//   psi(x)    its derivative, left limit at piecewise joins
//   weight(x) psi(x) / x, the IRLS weight, with its limit at x = 0

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace rofanova {

enum class LossFamily { median, huber, bisquare, hampel, optimal, least_squares };

std::string_view to_string(LossFamily family);
/// Accepts the names printed by to_string plus short aliases (med, hub, bis, ham, opt, ls).
LossFamily parse_loss_family(std::string_view name);

/// Cumulative rho for the optimal family, tabulated on [0, upper] with Simpson's rule.
class OptimalLossTable {
 public:
  OptimalLossTable(double a, double step = 1e-3);

  double a() const { return a_; }
  double step() const { return step_; }
  const std::vector<double>& knots() const { return cumulative_; }

  /// Integrand of rho: (x - a / phi(x))_+ for the standard normal density phi.
  static double psi(double a, double x);
  /// Value of rho at x; knot value plus a Simpson panel over the remainder.
  double rho(double x) const;

 private:
  double a_;
  double step_;
  double support_lo_ = 0.0;
  double support_hi_ = 0.0;
  std::vector<double> cumulative_;
};

class LossSpec {
 public:
  static LossSpec median();
  static LossSpec huber(double a);
  static LossSpec bisquare(double a);
  static LossSpec hampel(double a, double b, double c);
  static LossSpec optimal(double a);
  static LossSpec least_squares();
  /// Family with tuning constants calibrated to the given Gaussian location efficiency.
  static LossSpec calibrated(LossFamily family, double efficiency = 0.95);

  LossFamily family() const { return family_; }
  double a() const { return a_; }
  double b() const { return b_; }
  double c() const { return c_; }

  double rho(double x) const;
  double psi(double x) const;
  double weight(double x) const;

  /// True when psi vanishes beyond a finite rejection point.
  bool redescending() const;
  std::string describe() const;

 private:
  LossSpec(LossFamily family, double a, double b, double c);

  LossFamily family_;
  double a_ = 0.0;
  double b_ = 0.0;
  double c_ = 0.0;
  std::shared_ptr<const OptimalLossTable> table_;
};

struct TuningConstants {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

/// Hampel constants are a multiple of this shape.
inline constexpr double kHampelRatio[3] = {2.0, 4.0, 8.0};

/// (E psi')^2 / E psi^2 under the standard normal.
double asymptotic_efficiency(const LossSpec& loss);

/// Bisection on the tuning constant. Least squares returns all zeros for
/// efficiency 1; unattainable targets throw CalibrationError.
TuningConstants calibrate_tuning(LossFamily family, double efficiency);

}  // namespace rofanova
