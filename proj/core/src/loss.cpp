#include "rofanova/loss.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "rofanova/error.hpp"

namespace rofanova {

namespace {

constexpr double kSqrtTwoPi = 2.5066282746310002;

double normal_density(double x) { return std::exp(-0.5 * x * x) / kSqrtTwoPi; }

void require_nonnegative(double x) {
  if (!(x >= 0.0)) throw DomainError("loss functions are defined on [0, inf)");
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string(what) + " must be a positive finite tuning constant");
  }
}

// x - a / phi(x) is concave; its positive set is the interval (lower, upper).
struct OptimalSupport {
  double lower = 0.0;
  double upper = 0.0;
  bool empty = true;
};

OptimalSupport optimal_support(double a) {
  const auto g = [a](double x) { return x - a * kSqrtTwoPi * std::exp(0.5 * x * x); };
  // g'(x) = 1 - a sqrt(2 pi) x exp(x^2/2) is decreasing; locate its root.
  double lo = 0.0;
  double hi = 40.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (1.0 - a * kSqrtTwoPi * mid * std::exp(0.5 * mid * mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double peak = 0.5 * (lo + hi);
  OptimalSupport s;
  if (!(g(peak) > 0.0)) return s;
  s.empty = false;

  const auto root = [&g](double left, double right, bool rising) {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (left + right);
      if ((g(mid) > 0.0) == rising) {
        right = mid;
      } else {
        left = mid;
      }
    }
    return 0.5 * (left + right);
  };
  s.lower = g(0.0) >= 0.0 ? 0.0 : root(0.0, peak, true);
  double far = peak + 1.0;
  while (g(far) > 0.0) far *= 2.0;
  s.upper = root(peak, far, false);
  return s;
}

double simpson(const std::function<double(double)>& f, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  return (hi - lo) / 6.0 * (f(lo) + 4.0 * f(0.5 * (lo + hi)) + f(hi));
}

}  // namespace

std::string_view to_string(LossFamily family) {
  switch (family) {
    case LossFamily::median:
      return "median";
    case LossFamily::huber:
      return "huber";
    case LossFamily::bisquare:
      return "bisquare";
    case LossFamily::hampel:
      return "hampel";
    case LossFamily::optimal:
      return "optimal";
    case LossFamily::least_squares:
      return "least-squares";
  }
  return "unknown";
}

LossFamily parse_loss_family(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  std::replace(s.begin(), s.end(), '_', '-');
  if (s == "median" || s == "med") return LossFamily::median;
  if (s == "huber" || s == "hub") return LossFamily::huber;
  if (s == "bisquare" || s == "bis" || s == "tukey") return LossFamily::bisquare;
  if (s == "hampel" || s == "ham") return LossFamily::hampel;
  if (s == "optimal" || s == "opt") return LossFamily::optimal;
  if (s == "least-squares" || s == "ls" || s == "sqr") return LossFamily::least_squares;
  throw ConfigError("unknown loss family '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// OptimalLossTable

double OptimalLossTable::psi(double a, double x) {
  return std::max(0.0, x - a * kSqrtTwoPi * std::exp(0.5 * x * x));
}

OptimalLossTable::OptimalLossTable(double a, double step) : a_(a), step_(step) {
  require_positive(a, "optimal loss a");
  require_positive(step, "table step");
  const OptimalSupport support = optimal_support(a);
  if (support.empty) throw DomainError("optimal loss has psi identically zero for this a");
  support_lo_ = support.lower;
  support_hi_ = support.upper;

  const std::size_t knots = static_cast<std::size_t>(std::ceil(support.upper / step_)) + 1;
  cumulative_.assign(knots + 1, 0.0);
  const auto f = [a](double x) { return psi(a, x); };
  for (std::size_t k = 0; k < knots; ++k) {
    // Panels are clipped to the support so the kinks of the positive part
    // never fall inside a Simpson panel.
    const double lo = std::max(static_cast<double>(k) * step_, support.lower);
    const double hi = std::min(static_cast<double>(k + 1) * step_, support.upper);
    cumulative_[k + 1] = cumulative_[k] + simpson(f, lo, hi);
  }
}

double OptimalLossTable::rho(double x) const {
  const double pos = x / step_;
  const std::size_t last = cumulative_.size() - 1;
  if (pos >= static_cast<double>(last)) return cumulative_.back();
  const auto k = static_cast<std::size_t>(pos);
  const double lo = std::max(static_cast<double>(k) * step_, support_lo_);
  const double hi = std::min(x, support_hi_);
  const auto f = [this](double u) { return psi(a_, u); };
  return cumulative_[k] + simpson(f, lo, hi);
}

// ---------------------------------------------------------------------------
// LossSpec

LossSpec::LossSpec(LossFamily family, double a, double b, double c)
    : family_(family), a_(a), b_(b), c_(c) {}

LossSpec LossSpec::median() { return LossSpec(LossFamily::median, 0.0, 0.0, 0.0); }

LossSpec LossSpec::huber(double a) {
  require_positive(a, "huber a");
  return LossSpec(LossFamily::huber, a, 0.0, 0.0);
}

LossSpec LossSpec::bisquare(double a) {
  require_positive(a, "bisquare a");
  return LossSpec(LossFamily::bisquare, a, 0.0, 0.0);
}

LossSpec LossSpec::hampel(double a, double b, double c) {
  require_positive(a, "hampel a");
  require_positive(b, "hampel b");
  require_positive(c, "hampel c");
  if (!(a <= b && b <= c)) throw DomainError("hampel requires 0 < a <= b <= c");
  return LossSpec(LossFamily::hampel, a, b, c);
}

LossSpec LossSpec::optimal(double a) {
  require_positive(a, "optimal a");
  LossSpec spec(LossFamily::optimal, a, 0.0, 0.0);
  spec.table_ = std::make_shared<const OptimalLossTable>(a);
  return spec;
}

LossSpec LossSpec::least_squares() { return LossSpec(LossFamily::least_squares, 0.0, 0.0, 0.0); }

LossSpec LossSpec::calibrated(LossFamily family, double efficiency) {
  switch (family) {
    case LossFamily::median:
      return median();
    case LossFamily::least_squares:
      return least_squares();
    case LossFamily::huber:
      return huber(calibrate_tuning(family, efficiency).a);
    case LossFamily::bisquare:
      return bisquare(calibrate_tuning(family, efficiency).a);
    case LossFamily::hampel: {
      const TuningConstants t = calibrate_tuning(family, efficiency);
      return hampel(t.a, t.b, t.c);
    }
    case LossFamily::optimal:
      return optimal(calibrate_tuning(family, efficiency).a);
  }
  throw ConfigError("unknown loss family");
}

double LossSpec::rho(double x) const {
  require_nonnegative(x);
  switch (family_) {
    case LossFamily::median:
      return x;
    case LossFamily::least_squares:
      return x * x;
    case LossFamily::huber:
      return x <= a_ ? 0.5 * x * x : a_ * (x - 0.5 * a_);
    case LossFamily::bisquare: {
      if (x > a_) return a_ * a_ / 6.0;
      const double u = 1.0 - (x / a_) * (x / a_);
      return a_ * a_ / 6.0 * (1.0 - u * u * u);
    }
    case LossFamily::hampel: {
      if (x < a_) return 0.5 * x * x;
      if (x < b_) return a_ * (x - 0.5 * a_);
      if (x < c_) return a_ * (x - c_) * (x - c_) / (2.0 * (b_ - c_)) + a_ * (b_ + c_ - a_) / 2.0;
      return a_ * (b_ + c_ - a_) / 2.0;
    }
    case LossFamily::optimal:
      return table_->rho(x);
  }
  return 0.0;
}

double LossSpec::psi(double x) const {
  require_nonnegative(x);
  switch (family_) {
    case LossFamily::median:
      return x > 0.0 ? 1.0 : 0.0;
    case LossFamily::least_squares:
      return 2.0 * x;
    case LossFamily::huber:
      return x <= a_ ? x : a_;
    case LossFamily::bisquare: {
      if (x > a_) return 0.0;
      const double u = 1.0 - (x / a_) * (x / a_);
      return x * u * u;
    }
    case LossFamily::hampel:
      if (x <= a_) return x;
      if (x <= b_) return a_;
      if (x <= c_) return a_ * (c_ - x) / (c_ - b_);
      return 0.0;
    case LossFamily::optimal:
      return OptimalLossTable::psi(a_, x);
  }
  return 0.0;
}

double LossSpec::weight(double x) const {
  require_nonnegative(x);
  switch (family_) {
    case LossFamily::median:
      return x > 0.0 ? 1.0 / x : std::numeric_limits<double>::infinity();
    case LossFamily::least_squares:
      return 2.0;
    case LossFamily::huber:
      return x <= a_ ? 1.0 : a_ / x;
    case LossFamily::bisquare: {
      if (x >= a_) return 0.0;
      const double u = 1.0 - (x / a_) * (x / a_);
      return u * u;
    }
    case LossFamily::hampel:
      if (x <= a_) return 1.0;
      if (x <= b_) return a_ / x;
      if (x < c_) return a_ * (c_ - x) / ((c_ - b_) * x);
      return 0.0;
    case LossFamily::optimal:
      return x > 0.0 ? OptimalLossTable::psi(a_, x) / x : 0.0;
  }
  return 0.0;
}

bool LossSpec::redescending() const {
  return family_ == LossFamily::bisquare || family_ == LossFamily::hampel ||
         family_ == LossFamily::optimal;
}

std::string LossSpec::describe() const {
  std::ostringstream os;
  os.precision(6);
  os << to_string(family_);
  switch (family_) {
    case LossFamily::huber:
    case LossFamily::bisquare:
    case LossFamily::optimal:
      os << "(a=" << a_ << ")";
      break;
    case LossFamily::hampel:
      os << "(a=" << a_ << ",b=" << b_ << ",c=" << c_ << ")";
      break;
    default:
      break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Efficiency and calibration

double asymptotic_efficiency(const LossSpec& loss) {
  // By Stein's identity E psi'(Z) = E[Z psi(Z)], which also covers the
  // median's jump at zero. Both integrands are even, so integrate over [0, 12].
  constexpr int kPanels = 24000;
  constexpr double kUpper = 12.0;
  const double h = kUpper / kPanels;
  double slope = 0.0;
  double second = 0.0;
  for (int k = 0; k <= 2 * kPanels; ++k) {
    const double x = 0.5 * h * k;
    const double w = (k == 0 || k == 2 * kPanels) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    const double p = loss.psi(x);
    const double dens = normal_density(x);
    slope += w * x * p * dens;
    second += w * p * p * dens;
  }
  slope *= 2.0 * h / 6.0;
  second *= 2.0 * h / 6.0;
  if (!(second > 0.0)) return 0.0;
  return slope * slope / second;
}

TuningConstants calibrate_tuning(LossFamily family, double efficiency) {
  if (!(efficiency > 0.0 && efficiency <= 1.0)) {
    throw CalibrationError("target efficiency must lie in (0, 1]");
  }

  switch (family) {
    case LossFamily::least_squares:
      if (efficiency != 1.0) {
        throw CalibrationError("least squares has fixed efficiency 1 and no tuning constant");
      }
      return {};
    case LossFamily::median: {
      const double fixed = 2.0 / std::numbers::pi;
      if (std::abs(efficiency - fixed) > 1e-3) {
        throw CalibrationError("the median loss has fixed efficiency 2/pi and no tuning constant");
      }
      return {};
    }
    default:
      break;
  }

  std::function<LossSpec(double)> make;
  double lo = 0.0;
  double hi = 0.0;
  switch (family) {
    case LossFamily::huber:
      make = [](double t) { return LossSpec::huber(t); };
      lo = 1e-3;
      hi = 10.0;
      break;
    case LossFamily::bisquare:
      make = [](double t) { return LossSpec::bisquare(t); };
      lo = 0.1;
      hi = 30.0;
      break;
    case LossFamily::hampel:
      make = [](double t) {
        return LossSpec::hampel(kHampelRatio[0] * t, kHampelRatio[1] * t, kHampelRatio[2] * t);
      };
      lo = 0.01;
      hi = 5.0;
      break;
    case LossFamily::optimal:
      // Efficiency falls as a grows; search log(a).
      make = [](double t) { return LossSpec::optimal(std::exp(t)); };
      lo = std::log(1e-9);
      hi = std::log(0.2);
      break;
    default:
      throw CalibrationError("family has no tuning constant");
  }

  const auto eff = [&](double t) { return asymptotic_efficiency(make(t)); };
  const double eff_lo = eff(lo);
  const double eff_hi = eff(hi);
  const bool increasing = eff_hi > eff_lo;
  const double reach_min = std::min(eff_lo, eff_hi);
  const double reach_max = std::max(eff_lo, eff_hi);
  if (efficiency < reach_min || efficiency > reach_max) {
    throw CalibrationError("target efficiency is not attainable by " +
                           std::string(to_string(family)));
  }
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((eff(mid) < efficiency) == increasing) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double t = 0.5 * (lo + hi);
  const LossSpec spec = make(t);
  return {spec.a(), spec.b(), spec.c()};
}

}  // namespace rofanova
