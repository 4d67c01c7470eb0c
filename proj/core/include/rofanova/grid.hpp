#pragma once

// Discretized functional data on evenly spaced 1D/2D grids.
//
// Grid points sit at the midpoints of equal subintervals of each axis, so the
// rectangle rule (mean of the values times the domain measure) integrates
// constants exactly. 2D values are stored row-major: the second axis varies
// fastest.

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace rofanova {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double length() const { return hi - lo; }
  bool operator==(const Interval&) const = default;
};

class DomainGrid {
 public:
  static DomainGrid line(std::size_t points, Interval bounds = {});
  static DomainGrid plane(std::size_t points_x, std::size_t points_y, Interval bounds_x = {},
                          Interval bounds_y = {});

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return points_[0] * points_[1]; }
  std::size_t points(std::size_t axis) const { return points_.at(axis); }
  Interval bounds(std::size_t axis) const { return bounds_.at(axis); }

  double coordinate(std::size_t axis, std::size_t k) const;
  std::vector<double> coordinates(std::size_t axis) const;

  /// Lebesgue measure of the domain.
  double measure() const;
  /// Quadrature weight shared by every grid point.
  double cell_weight() const { return measure() / static_cast<double>(size()); }

  bool operator==(const DomainGrid&) const = default;

 private:
  DomainGrid(std::size_t dim, std::array<std::size_t, 2> points, std::array<Interval, 2> bounds);

  std::size_t dim_ = 1;
  std::array<std::size_t, 2> points_{1, 1};
  std::array<Interval, 2> bounds_{};
};

class GridFunction {
 public:
  /// Throws NumericInputError on non-finite values and ShapeError on a length mismatch.
  GridFunction(DomainGrid grid, std::vector<double> values);

  static GridFunction constant(const DomainGrid& grid, double value);
  static GridFunction zero(const DomainGrid& grid) { return constant(grid, 0.0); }
  /// Evaluates fn at every point of a 1D grid.
  static GridFunction from_1d(const DomainGrid& grid, const std::function<double(double)>& fn);

  const DomainGrid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }

  bool operator==(const GridFunction&) const = default;

 private:
  DomainGrid grid_;
  std::vector<double> values_;
};

GridFunction operator+(const GridFunction& f, const GridFunction& g);
GridFunction operator-(const GridFunction& f, const GridFunction& g);
GridFunction operator*(double c, const GridFunction& f);

/// Factor-level indices of one unit, zero-based. One-way designs use only `a`.
struct Label {
  std::size_t a = 0;
  std::size_t b = 0;

  bool operator==(const Label&) const = default;
};

/// n functions on a shared grid, stored as a row-major n x grid.size() matrix,
/// with optional per-unit factor labels.
class FunctionalSample {
 public:
  FunctionalSample(DomainGrid grid, std::size_t count, std::vector<double> values,
                   std::vector<Label> labels = {}, std::size_t levels_a = 0,
                   std::size_t levels_b = 0);

  static FunctionalSample from_functions(std::span<const GridFunction> functions,
                                         std::vector<Label> labels = {},
                                         std::size_t levels_a = 0, std::size_t levels_b = 0);

  const DomainGrid& grid() const { return grid_; }
  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }
  std::size_t grid_size() const { return grid_.size(); }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * grid_size(), grid_size()};
  }
  std::span<const double> values() const { return values_; }
  GridFunction function(std::size_t i) const;

  bool has_labels() const { return !labels_.empty(); }
  const std::vector<Label>& labels() const { return labels_; }
  const Label& label(std::size_t i) const { return labels_.at(i); }
  std::size_t levels_a() const { return levels_a_; }
  std::size_t levels_b() const { return levels_b_; }

  /// Slot i of the result holds function order[i]; labels stay with their slots.
  FunctionalSample reassigned(std::span<const std::size_t> order) const;
  /// Units at the given indices with their labels.
  FunctionalSample subset(std::span<const std::size_t> indices) const;
  FunctionalSample shifted(const GridFunction& h) const;
  FunctionalSample scaled(double c) const;

  bool operator==(const FunctionalSample&) const = default;

 private:
  DomainGrid grid_;
  std::size_t count_ = 0;
  std::vector<double> values_;
  std::vector<Label> labels_;
  std::size_t levels_a_ = 0;
  std::size_t levels_b_ = 0;
};

/// sqrt(mean(values^2) * measure): the rectangle rule for the L2 norm.
double l2_norm(const GridFunction& f);
double l2_norm(std::span<const double> values, const DomainGrid& grid);

enum class CombineOp {
  add,       // sum of all inputs
  subtract,  // first input minus the rest
  scale,     // first input times `scalar`
  divide,    // first input over max(second input, divisor_floor)
};

GridFunction pointwise_combine(std::span<const GridFunction> fs, CombineOp op, double scalar = 1.0,
                               double divisor_floor = 1e-10);

/// Pointwise sample median; even counts average the two middle order statistics.
GridFunction pointwise_median(const FunctionalSample& sample);
GridFunction pointwise_median(const FunctionalSample& sample,
                              std::span<const std::size_t> members);
GridFunction pointwise_mean(const FunctionalSample& sample, std::span<const std::size_t> members);

/// Median of a scratch buffer; reorders it.
double median_inplace(std::span<double> values);

}  // namespace rofanova
