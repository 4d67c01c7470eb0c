#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "rofanova/error.hpp"
#include "rofanova/grid.hpp"

namespace rofanova {
namespace {

GridFunction random_function(const DomainGrid& grid, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 2.0);
  std::vector<double> v(grid.size());
  for (double& x : v) x = normal(rng);
  return GridFunction(grid, std::move(v));
}

TEST(DomainGrid, MidpointsAndMeasure) {
  const DomainGrid g = DomainGrid::line(25);
  EXPECT_EQ(g.size(), 25u);
  EXPECT_DOUBLE_EQ(g.coordinate(0, 0), 0.02);
  EXPECT_DOUBLE_EQ(g.coordinate(0, 12), 0.5);
  EXPECT_DOUBLE_EQ(g.measure(), 1.0);

  const DomainGrid p = DomainGrid::plane(4, 5, {0.0, 2.0}, {-1.0, 1.0});
  EXPECT_EQ(p.dim(), 2u);
  EXPECT_EQ(p.size(), 20u);
  EXPECT_DOUBLE_EQ(p.measure(), 4.0);
  const auto xs = p.coordinates(0);
  for (std::size_t k = 1; k < xs.size(); ++k) EXPECT_NEAR(xs[k] - xs[k - 1], 0.5, 1e-15);
}

TEST(DomainGrid, RejectsBadBounds) {
  EXPECT_THROW(DomainGrid::line(0), DomainError);
  EXPECT_THROW(DomainGrid::line(5, {1.0, 1.0}), DomainError);
}

TEST(GridFunction, ValidatesValues) {
  const DomainGrid g = DomainGrid::line(3);
  EXPECT_THROW(GridFunction(g, {1.0, 2.0}), ShapeError);
  EXPECT_THROW(GridFunction(g, {1.0, std::nan(""), 2.0}), NumericInputError);
  EXPECT_THROW(GridFunction(g, {1.0, std::numeric_limits<double>::infinity(), 2.0}),
               NumericInputError);
}

TEST(L2Norm, Examples) {
  EXPECT_EQ(l2_norm(GridFunction::zero(DomainGrid::line(7))), 0.0);
  EXPECT_EQ(l2_norm(GridFunction::zero(DomainGrid::plane(3, 4))), 0.0);
  EXPECT_DOUBLE_EQ(l2_norm(GridFunction::constant(DomainGrid::line(25), 1.0)), 1.0);

  // int_0^1 t^2 dt = 1/3.
  const auto f = GridFunction::from_1d(DomainGrid::line(1001), [](double t) { return t; });
  EXPECT_NEAR(l2_norm(f), 1.0 / std::sqrt(3.0), 1e-3);
}

TEST(L2Norm, TensorRuleOn2D) {
  // f(x, y) = x y on [0,1]^2: ||f||^2 = 1/9.
  const DomainGrid g = DomainGrid::plane(200, 200);
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < 200; ++i) {
    for (std::size_t j = 0; j < 200; ++j) v[i * 200 + j] = g.coordinate(0, i) * g.coordinate(1, j);
  }
  EXPECT_NEAR(l2_norm(GridFunction(g, v)), 1.0 / 3.0, 1e-4);
}

TEST(L2Norm, HomogeneityAndTriangle) {
  std::mt19937_64 rng(11);
  const DomainGrid g = DomainGrid::line(17, {-2.0, 3.0});
  std::uniform_real_distribution<double> coef(-5.0, 5.0);
  for (int rep = 0; rep < 200; ++rep) {
    const GridFunction f = random_function(g, rng);
    const GridFunction h = random_function(g, rng);
    const double c = coef(rng);
    EXPECT_NEAR(l2_norm(c * f), std::abs(c) * l2_norm(f), 1e-12 * (1.0 + l2_norm(f)));
    EXPECT_LE(l2_norm(f + h), l2_norm(f) + l2_norm(h) + 1e-12);
  }
}

TEST(PointwiseCombine, Examples) {
  const DomainGrid g = DomainGrid::line(5);
  const GridFunction one = GridFunction::constant(g, 1.0);
  const GridFunction two = GridFunction::constant(g, 2.0);
  const GridFunction four = GridFunction::constant(g, 4.0);

  const GridFunction add_in[] = {one, one};
  EXPECT_EQ(pointwise_combine(add_in, CombineOp::add), two);
  EXPECT_EQ(pointwise_combine(std::span(&two, 1), CombineOp::scale, 0.0), GridFunction::zero(g));
  const GridFunction div_in[] = {two, four};
  EXPECT_EQ(pointwise_combine(div_in, CombineOp::divide), GridFunction::constant(g, 0.5));
  const GridFunction sub_in[] = {four, one, one};
  EXPECT_EQ(pointwise_combine(sub_in, CombineOp::subtract), two);
}

TEST(PointwiseCombine, DivideFloorsTheDivisor) {
  const DomainGrid g = DomainGrid::line(2);
  const GridFunction in[] = {GridFunction::constant(g, 1.0), GridFunction::zero(g)};
  const GridFunction q = pointwise_combine(in, CombineOp::divide, 1.0, 1e-10);
  EXPECT_DOUBLE_EQ(q[0], 1e10);
}

TEST(PointwiseCombine, GridMismatchIsAShapeError) {
  const GridFunction in[] = {GridFunction::constant(DomainGrid::line(3), 1.0),
                             GridFunction::constant(DomainGrid::line(4), 1.0)};
  EXPECT_THROW(pointwise_combine(in, CombineOp::add), ShapeError);
}

TEST(PointwiseMedian, Examples) {
  const DomainGrid g = DomainGrid::line(6);
  const auto constants = [&](std::vector<double> cs) {
    std::vector<GridFunction> fs;
    for (double c : cs) fs.push_back(GridFunction::constant(g, c));
    return FunctionalSample::from_functions(fs);
  };
  const GridFunction lone = GridFunction::from_1d(g, [](double t) { return std::sin(t); });
  EXPECT_EQ(pointwise_median(FunctionalSample::from_functions(std::span(&lone, 1))), lone);
  EXPECT_EQ(pointwise_median(constants({1.0, 2.0, 100.0})), GridFunction::constant(g, 2.0));
  EXPECT_EQ(pointwise_median(constants({0.0, 1.0})), GridFunction::constant(g, 0.5));
}

TEST(PointwiseMedian, EmptySampleIsRejected) {
  const FunctionalSample empty(DomainGrid::line(3), 0, {});
  EXPECT_THROW(pointwise_median(empty), EmptyInputError);
}

TEST(PointwiseMedian, PermutationAndShiftInvariance) {
  std::mt19937_64 rng(5);
  const DomainGrid g = DomainGrid::line(9);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<GridFunction> fs;
    const std::size_t n = 1 + rep % 8;
    for (std::size_t i = 0; i < n; ++i) fs.push_back(random_function(g, rng));
    const FunctionalSample s = FunctionalSample::from_functions(fs);
    const GridFunction med = pointwise_median(s);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    EXPECT_EQ(pointwise_median(s.reassigned(order)), med);

    const GridFunction h = random_function(g, rng);
    const GridFunction shifted = pointwise_median(s.shifted(h));
    const GridFunction expected = med + h;
    for (std::size_t k = 0; k < g.size(); ++k) EXPECT_NEAR(shifted[k], expected[k], 1e-12);
  }
}

TEST(FunctionalSample, LabelsMustFitCardinalities) {
  const DomainGrid g = DomainGrid::line(2);
  EXPECT_THROW(FunctionalSample(g, 2, {0, 0, 1, 1}, {{0, 0}, {2, 0}}, 2, 1), DesignError);
  EXPECT_THROW(FunctionalSample(g, 2, {0, 0, 1, 1}, {{0, 0}}, 2, 1), ShapeError);
  const FunctionalSample ok(g, 2, {0, 0, 1, 1}, {{0, 0}, {1, 0}}, 2, 1);
  EXPECT_EQ(ok.levels_b(), 1u);
}

TEST(FunctionalSample, ReassignKeepsLabelSlots) {
  const DomainGrid g = DomainGrid::line(1);
  const FunctionalSample s(g, 3, {10, 20, 30}, {{0, 0}, {1, 0}, {2, 0}}, 3, 1);
  const std::size_t order[] = {2, 0, 1};
  const FunctionalSample r = s.reassigned(order);
  EXPECT_EQ(r.row(0)[0], 30);
  EXPECT_EQ(r.row(1)[0], 10);
  EXPECT_EQ(r.labels(), s.labels());
}

}  // namespace
}  // namespace rofanova
