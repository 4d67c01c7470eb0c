#include "rofanova/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rofanova/error.hpp"

namespace rofanova {

namespace {

void check_interval(Interval iv) {
  if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || !(iv.hi > iv.lo)) {
    throw DomainError("grid bounds must be a finite interval with hi > lo");
  }
}

void require_same_grid(const DomainGrid& a, const DomainGrid& b) {
  if (!(a == b)) throw ShapeError("grid functions live on different grids");
}

}  // namespace

DomainGrid::DomainGrid(std::size_t dim, std::array<std::size_t, 2> points,
                       std::array<Interval, 2> bounds)
    : dim_(dim), points_(points), bounds_(bounds) {
  for (std::size_t axis = 0; axis < dim_; ++axis) {
    if (points_[axis] == 0) throw DomainError("grid needs at least one point per axis");
    check_interval(bounds_[axis]);
  }
}

DomainGrid DomainGrid::line(std::size_t points, Interval bounds) {
  return DomainGrid(1, {points, 1}, {bounds, Interval{}});
}

DomainGrid DomainGrid::plane(std::size_t points_x, std::size_t points_y, Interval bounds_x,
                             Interval bounds_y) {
  return DomainGrid(2, {points_x, points_y}, {bounds_x, bounds_y});
}

double DomainGrid::coordinate(std::size_t axis, std::size_t k) const {
  const Interval iv = bounds_.at(axis);
  const double h = iv.length() / static_cast<double>(points_.at(axis));
  return iv.lo + (static_cast<double>(k) + 0.5) * h;
}

std::vector<double> DomainGrid::coordinates(std::size_t axis) const {
  std::vector<double> out(points(axis));
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = coordinate(axis, k);
  return out;
}

double DomainGrid::measure() const {
  double m = bounds_[0].length();
  if (dim_ == 2) m *= bounds_[1].length();
  return m;
}

GridFunction::GridFunction(DomainGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw ShapeError("grid function has " + std::to_string(values_.size()) +
                     " values for a grid of " + std::to_string(grid_.size()) + " points");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw NumericInputError("grid function contains a non-finite value");
  }
}

GridFunction GridFunction::constant(const DomainGrid& grid, double value) {
  return GridFunction(grid, std::vector<double>(grid.size(), value));
}

GridFunction GridFunction::from_1d(const DomainGrid& grid, const std::function<double(double)>& fn) {
  if (grid.dim() != 1) throw ShapeError("from_1d needs a 1D grid");
  std::vector<double> v(grid.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = fn(grid.coordinate(0, k));
  return GridFunction(grid, std::move(v));
}

GridFunction operator+(const GridFunction& f, const GridFunction& g) {
  const GridFunction fs[] = {f, g};
  return pointwise_combine(fs, CombineOp::add);
}

GridFunction operator-(const GridFunction& f, const GridFunction& g) {
  const GridFunction fs[] = {f, g};
  return pointwise_combine(fs, CombineOp::subtract);
}

GridFunction operator*(double c, const GridFunction& f) {
  return pointwise_combine(std::span<const GridFunction>(&f, 1), CombineOp::scale, c);
}

FunctionalSample::FunctionalSample(DomainGrid grid, std::size_t count, std::vector<double> values,
                                   std::vector<Label> labels, std::size_t levels_a,
                                   std::size_t levels_b)
    : grid_(grid),
      count_(count),
      values_(std::move(values)),
      labels_(std::move(labels)),
      levels_a_(levels_a),
      levels_b_(levels_b) {
  if (values_.size() != count_ * grid_.size()) {
    throw ShapeError("sample values do not match count x grid size");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw NumericInputError("sample contains a non-finite value");
  }
  if (!labels_.empty()) {
    if (labels_.size() != count_) throw ShapeError("one label per function is required");
    if (levels_a_ == 0) throw DesignError("labelled sample declares zero levels for factor A");
    if (levels_b_ == 0) levels_b_ = 1;
    for (const Label& l : labels_) {
      if (l.a >= levels_a_ || l.b >= levels_b_) {
        throw DesignError("label outside the declared factor cardinalities");
      }
    }
  }
}

FunctionalSample FunctionalSample::from_functions(std::span<const GridFunction> functions,
                                                  std::vector<Label> labels, std::size_t levels_a,
                                                  std::size_t levels_b) {
  if (functions.empty()) throw EmptyInputError("cannot build a sample from zero functions");
  const DomainGrid grid = functions.front().grid();
  std::vector<double> values;
  values.reserve(functions.size() * grid.size());
  for (const GridFunction& f : functions) {
    require_same_grid(grid, f.grid());
    values.insert(values.end(), f.values().begin(), f.values().end());
  }
  return FunctionalSample(grid, functions.size(), std::move(values), std::move(labels), levels_a,
                          levels_b);
}

GridFunction FunctionalSample::function(std::size_t i) const {
  const auto r = row(i);
  return GridFunction(grid_, std::vector<double>(r.begin(), r.end()));
}

FunctionalSample FunctionalSample::reassigned(std::span<const std::size_t> order) const {
  if (order.size() != count_) throw ShapeError("reassignment order must cover every unit");
  const std::size_t m = grid_size();
  std::vector<double> values(values_.size());
  for (std::size_t slot = 0; slot < count_; ++slot) {
    const auto src = row(order[slot]);
    std::copy(src.begin(), src.end(), values.begin() + static_cast<std::ptrdiff_t>(slot * m));
  }
  return FunctionalSample(grid_, count_, std::move(values), labels_, levels_a_, levels_b_);
}

FunctionalSample FunctionalSample::subset(std::span<const std::size_t> indices) const {
  const std::size_t m = grid_size();
  std::vector<double> values;
  values.reserve(indices.size() * m);
  std::vector<Label> labels;
  for (std::size_t i : indices) {
    const auto src = row(i);
    values.insert(values.end(), src.begin(), src.end());
    if (has_labels()) labels.push_back(labels_[i]);
  }
  return FunctionalSample(grid_, indices.size(), std::move(values), std::move(labels), levels_a_,
                          levels_b_);
}

FunctionalSample FunctionalSample::shifted(const GridFunction& h) const {
  require_same_grid(grid_, h.grid());
  std::vector<double> values = values_;
  const std::size_t m = grid_size();
  for (std::size_t i = 0; i < count_; ++i) {
    for (std::size_t k = 0; k < m; ++k) values[i * m + k] += h[k];
  }
  return FunctionalSample(grid_, count_, std::move(values), labels_, levels_a_, levels_b_);
}

FunctionalSample FunctionalSample::scaled(double c) const {
  std::vector<double> values = values_;
  for (double& v : values) v *= c;
  return FunctionalSample(grid_, count_, std::move(values), labels_, levels_a_, levels_b_);
}

double l2_norm(std::span<const double> values, const DomainGrid& grid) {
  double ss = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericInputError("l2_norm of a non-finite value");
    ss += v * v;
  }
  return std::sqrt(ss * grid.cell_weight());
}

double l2_norm(const GridFunction& f) { return l2_norm(f.values(), f.grid()); }

GridFunction pointwise_combine(std::span<const GridFunction> fs, CombineOp op, double scalar,
                               double divisor_floor) {
  if (fs.empty()) throw EmptyInputError("pointwise_combine needs at least one function");
  const DomainGrid& grid = fs.front().grid();
  for (const GridFunction& f : fs) require_same_grid(grid, f.grid());
  std::vector<double> out(fs.front().values().begin(), fs.front().values().end());

  switch (op) {
    case CombineOp::add:
      for (std::size_t j = 1; j < fs.size(); ++j) {
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += fs[j][k];
      }
      break;
    case CombineOp::subtract:
      for (std::size_t j = 1; j < fs.size(); ++j) {
        for (std::size_t k = 0; k < out.size(); ++k) out[k] -= fs[j][k];
      }
      break;
    case CombineOp::scale:
      for (double& v : out) v *= scalar;
      break;
    case CombineOp::divide:
      if (fs.size() != 2) throw ShapeError("divide takes exactly a dividend and a divisor");
      if (!(divisor_floor > 0.0)) throw DomainError("divisor floor must be positive");
      for (std::size_t k = 0; k < out.size(); ++k) out[k] /= std::max(fs[1][k], divisor_floor);
      break;
  }
  return GridFunction(grid, std::move(out));
}

double median_inplace(std::span<double> values) {
  if (values.empty()) throw EmptyInputError("median of an empty set");
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  const double upper = *mid;
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

GridFunction pointwise_median(const FunctionalSample& sample, std::span<const std::size_t> members) {
  if (members.empty()) throw EmptyInputError("pointwise median of an empty sample");
  const std::size_t m = sample.grid_size();
  std::vector<double> out(m);
  std::vector<double> column(members.size());
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t j = 0; j < members.size(); ++j) column[j] = sample.row(members[j])[k];
    out[k] = median_inplace(column);
  }
  return GridFunction(sample.grid(), std::move(out));
}

GridFunction pointwise_median(const FunctionalSample& sample) {
  std::vector<std::size_t> all(sample.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return pointwise_median(sample, all);
}

GridFunction pointwise_mean(const FunctionalSample& sample, std::span<const std::size_t> members) {
  if (members.empty()) throw EmptyInputError("pointwise mean of an empty sample");
  const std::size_t m = sample.grid_size();
  std::vector<double> out(m, 0.0);
  for (std::size_t i : members) {
    const auto r = sample.row(i);
    for (std::size_t k = 0; k < m; ++k) out[k] += r[k];
  }
  const double inv = 1.0 / static_cast<double>(members.size());
  for (double& v : out) v *= inv;
  return GridFunction(sample.grid(), std::move(out));
}

}  // namespace rofanova
