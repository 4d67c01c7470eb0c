#pragma once

// Functional median, FuNMAD scale and the scale-equivariant functional
// M-estimator of location, all computed by iteratively reweighted least squares.
//
// The M-estimator minimizes
//     J(y) = sum_i rho(|| (X_i - y) / sigma ||)
// over y in L2. Its stationarity condition makes the minimizer a weighted
// average of the sample with weights psi(d_i) / d_i, so every iterate is
//     y_k = sum_i w_i X_i,   w_i proportional to weight(d_i(y_{k-1})).
// Each overload taking `members` works on that subset of the sample's rows.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rofanova/grid.hpp"
#include "rofanova/loss.hpp"

namespace rofanova {

/// Consistency constant Phi^{-1}(3/4) of the normalized MAD.
inline constexpr double kMadConsistency = 0.6745;

enum class InitKind { pointwise_median, sample_mean, user };

struct IrlsConfig {
  double tolerance = 1e-6;  // relative change of J between iterates
  int max_iterations = 100;
  InitKind init = InitKind::pointwise_median;
  std::optional<GridFunction> user_init;
  double scale_floor = 1e-10;

  void validate() const;
};

struct RobustLocation {
  GridFunction location;
  std::vector<double> weights;  // normalized, one per unit
  int iterations = 0;
  double objective = 0.0;
  bool converged = true;
  bool degenerate = false;  // every unit rejected; fell back to the pointwise median
};

/// Pointwise robust scale sigma(t) >= 0.
class ScaleFunction {
 public:
  explicit ScaleFunction(GridFunction values);
  static ScaleFunction unit(const DomainGrid& grid);

  const DomainGrid& grid() const { return values_.grid(); }
  std::span<const double> values() const { return values_.values(); }
  const GridFunction& function() const { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }

  /// 1 / max(sigma(t), floor) at every grid point.
  std::vector<double> floored_inverse(double floor) const;

  bool operator==(const ScaleFunction&) const = default;

 private:
  GridFunction values_;
};

/// Minimizer of sum_i ||X_i - y|| by Weiszfeld iteration. Iterates that land
/// on a data function stop there when it satisfies the optimality condition
/// and otherwise take a Vardi-Zhang step off it.
RobustLocation functional_median(const FunctionalSample& sample, const IrlsConfig& cfg = {});
RobustLocation functional_median(const FunctionalSample& sample,
                                 std::span<const std::size_t> members, const IrlsConfig& cfg);

/// (1 / 0.6745) * pointwise median of |X_i - center|.
ScaleFunction normalized_mad(const FunctionalSample& sample, std::span<const std::size_t> members,
                             const GridFunction& center);

/// normalized_mad about the functional median. Needs at least two units.
ScaleFunction funmad(const FunctionalSample& sample, const IrlsConfig& cfg = {});
ScaleFunction funmad(const FunctionalSample& sample, std::span<const std::size_t> members,
                     const IrlsConfig& cfg);

RobustLocation m_estimate(const FunctionalSample& sample, const LossSpec& loss,
                          const ScaleFunction& sigma, const IrlsConfig& cfg = {});
RobustLocation m_estimate(const FunctionalSample& sample, std::span<const std::size_t> members,
                          const LossSpec& loss, const ScaleFunction& sigma, const IrlsConfig& cfg);

/// J(y) with sigma floored at scale_floor.
double m_objective(const FunctionalSample& sample, std::span<const std::size_t> members,
                   const LossSpec& loss, const ScaleFunction& sigma, std::span<const double> y,
                   double scale_floor);
double m_objective(const FunctionalSample& sample, const LossSpec& loss, const ScaleFunction& sigma,
                   const GridFunction& y, double scale_floor = 1e-10);

}  // namespace rofanova
