#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "rofanova/error.hpp"
#include "rofanova/robust.hpp"

namespace rofanova {
namespace {

using testing::Vec;

FunctionalSample constants(const DomainGrid& g, const std::vector<double>& cs) {
  std::vector<GridFunction> fs;
  for (double c : cs) fs.push_back(GridFunction::constant(g, c));
  return FunctionalSample::from_functions(fs);
}

FunctionalSample random_sample(std::size_t n, std::size_t m, std::mt19937_64& rng,
                               double outlier_shift = 0.0) {
  const DomainGrid g = DomainGrid::line(m);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> v(n * m);
  for (double& x : v) x = z(rng);
  if (outlier_shift != 0.0) {
    for (std::size_t k = 0; k < m; ++k) v[k] += outlier_shift;
  }
  return FunctionalSample(g, n, std::move(v));
}

std::vector<Vec> rows_of(const FunctionalSample& s) {
  std::vector<Vec> rows;
  for (std::size_t i = 0; i < s.size(); ++i) rows.emplace_back(s.row(i).begin(), s.row(i).end());
  return rows;
}

// J(y) evaluated directly from the definition.
double objective_oracle(const FunctionalSample& s, const LossSpec& loss, std::span<const double> sigma,
                        const Vec& y) {
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    Vec r(y.size());
    for (std::size_t k = 0; k < y.size(); ++k) r[k] = (s.row(i)[k] - y[k]) / std::max(sigma[k], 1e-10);
    total += loss.rho(std::sqrt(testing::sq_norm(r, s.grid().measure())));
  }
  return total;
}

IrlsConfig tight() {
  IrlsConfig cfg;
  cfg.tolerance = 1e-14;
  cfg.max_iterations = 20000;
  return cfg;
}

TEST(Consistency, MadConstantIsNormalQuartile) {
  // Phi(0.6745) = 3/4 to four digits.
  EXPECT_NEAR(0.5 * std::erfc(-kMadConsistency / std::sqrt(2.0)), 0.75, 1e-4);
}

TEST(IrlsConfig, Validation) {
  IrlsConfig cfg;
  cfg.tolerance = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.max_iterations = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.scale_floor = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.init = InitKind::user;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(FunctionalMedian, SingleFunction) {
  const DomainGrid g = DomainGrid::line(8);
  const GridFunction f = GridFunction::from_1d(g, [](double t) { return std::cos(3 * t); });
  const RobustLocation r = functional_median(FunctionalSample::from_functions(std::span(&f, 1)));
  EXPECT_EQ(r.location, f);
  EXPECT_DOUBLE_EQ(r.weights[0], 1.0);
}

TEST(FunctionalMedian, SymmetricPair) {
  const DomainGrid g = DomainGrid::line(8);
  const GridFunction f = GridFunction::from_1d(g, [](double t) { return t * t + 1.0; });
  const GridFunction pair[] = {-1.0 * f, f};
  const RobustLocation r = functional_median(FunctionalSample::from_functions(pair));
  EXPECT_NEAR(l2_norm(r.location), 0.0, 1e-12);
}

TEST(FunctionalMedian, CoincidentPointsDominate) {
  const RobustLocation r = functional_median(constants(DomainGrid::line(5), {0, 0, 0, 10}));
  for (double v : r.location.values()) EXPECT_NEAR(v, 0.0, 1e-6);
}

TEST(FunctionalMedian, EmptySampleIsRejected) {
  EXPECT_THROW(functional_median(FunctionalSample(DomainGrid::line(3), 0, {})), EmptyInputError);
}

TEST(FunctionalMedian, MatchesBruteForceOnSmallSamples) {
  std::mt19937_64 rng(101);
  for (int rep = 0; rep < 12; ++rep) {
    const std::size_t n = 2 + rep % 4;
    const FunctionalSample s = random_sample(n, 6, rng, rep % 3 == 0 ? 8.0 : 0.0);
    const RobustLocation r = functional_median(s, tight());
    const auto rows = rows_of(s);
    const auto sum_dist = [&](const Vec& y) {
      double t = 0.0;
      for (const Vec& x : rows) {
        Vec d(y.size());
        for (std::size_t k = 0; k < y.size(); ++k) d[k] = x[k] - y[k];
        t += std::sqrt(testing::sq_norm(d));
      }
      return t;
    };
    const double brute = testing::brute_force_span_minimum(rows, sum_dist);
    const Vec y(r.location.values().begin(), r.location.values().end());
    EXPECT_NEAR(sum_dist(y), brute, 1e-6) << "rep " << rep;
    EXPECT_LE(sum_dist(y), brute + 1e-6);
  }
}

TEST(FunctionalMedian, OnDataPointThatIsNotOptimalMovesOff) {
  // Pointwise median initializer lands on the middle curve, which is not the
  // geometric median of these three non-collinear functions.
  const DomainGrid g = DomainGrid::line(2);
  const FunctionalSample s(g, 3, {0, 0, 1, 0, 0.5, 3});
  const RobustLocation r = functional_median(s, tight());
  const auto rows = rows_of(s);
  const auto sum_dist = [&](const Vec& y) {
    double t = 0.0;
    for (const Vec& x : rows) t += std::hypot(x[0] - y[0], x[1] - y[1]);
    return t;
  };
  const Vec y(r.location.values().begin(), r.location.values().end());
  EXPECT_NEAR(sum_dist(y), testing::brute_force_span_minimum(rows, sum_dist), 1e-6);
}

TEST(Funmad, IdenticalFunctionsGiveZero) {
  const DomainGrid g = DomainGrid::line(7);
  const GridFunction f = GridFunction::from_1d(g, [](double t) { return std::exp(t); });
  const std::vector<GridFunction> fs(4, f);
  const ScaleFunction s = funmad(FunctionalSample::from_functions(fs));
  for (double v : s.values()) EXPECT_EQ(v, 0.0);
}

TEST(Funmad, ThreeSymmetricConstants) {
  const ScaleFunction s = funmad(constants(DomainGrid::line(9), {-1, 0, 1}));
  for (double v : s.values()) EXPECT_NEAR(v, 1.0 / 0.6745, 1e-9);
  EXPECT_NEAR(s[0], 1.4826, 1e-4);
}

TEST(Funmad, NeedsTwoFunctions) {
  EXPECT_THROW(funmad(constants(DomainGrid::line(3), {1.0})), InsufficientSampleError);
}

TEST(Funmad, PointwiseConsistencyForGaussianData) {
  std::mt19937_64 rng(7);
  const std::size_t n = 2000;
  const std::size_t m = 25;
  const double sigma = 2.5;
  std::normal_distribution<double> z(0.0, sigma);
  std::vector<double> v(n * m);
  for (double& x : v) x = z(rng);
  const ScaleFunction s = funmad(FunctionalSample(DomainGrid::line(m), n, std::move(v)));
  std::size_t inside = 0;
  for (double x : s.values()) inside += (x >= 0.9 * sigma && x <= 1.1 * sigma) ? 1 : 0;
  EXPECT_GE(static_cast<double>(inside), 0.95 * m);
}

TEST(ScaleFunction, RejectsNegativeValues) {
  EXPECT_THROW(ScaleFunction(GridFunction(DomainGrid::line(2), {1.0, -0.1})), DomainError);
  const ScaleFunction s(GridFunction(DomainGrid::line(2), {0.0, 4.0}));
  const auto inv = s.floored_inverse(1e-10);
  EXPECT_DOUBLE_EQ(inv[0], 1e10);
  EXPECT_DOUBLE_EQ(inv[1], 0.25);
}

TEST(MEstimate, LeastSquaresWithUnitScaleIsTheMean) {
  std::mt19937_64 rng(13);
  const FunctionalSample s = random_sample(9, 12, rng, 30.0);
  const RobustLocation r =
      m_estimate(s, LossSpec::least_squares(), ScaleFunction::unit(s.grid()));
  std::vector<std::size_t> all(s.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const GridFunction mean = pointwise_mean(s, all);
  for (std::size_t k = 0; k < mean.size(); ++k) EXPECT_NEAR(r.location[k], mean[k], 1e-12);
  for (double w : r.weights) EXPECT_NEAR(w, 1.0 / 9.0, 1e-12);
}

TEST(MEstimate, HuberSingleOutlierMatchesScalarOracle) {
  const LossSpec huber = LossSpec::huber(1.345);
  const FunctionalSample s = constants(DomainGrid::line(4), {0, 0, 0, 0, 25});
  const RobustLocation r = m_estimate(s, huber, ScaleFunction::unit(s.grid()), tight());
  // 4 psi(-mu) + psi(25 - mu) = 0  =>  mu = a / 4.
  const double mu = testing::scalar_m_location({0, 0, 0, 0, 25}, [&](double x) {
    return x >= 0 ? huber.psi(x) : -huber.psi(-x);
  });
  EXPECT_NEAR(mu, 1.345 / 4.0, 1e-12);
  for (double v : r.location.values()) EXPECT_NEAR(v, mu, 1e-6);
}

TEST(MEstimate, HuberWithFunmadScaleIgnoresTheOutlier) {
  const LossSpec huber = LossSpec::huber(1.345);
  const FunctionalSample s = constants(DomainGrid::line(4), {-0.1, 0.05, 0, 0.1, 25});
  const RobustLocation r = m_estimate(s, huber, funmad(s));
  for (double v : r.location.values()) EXPECT_NEAR(v, 0.0, 0.05);
}

TEST(MEstimate, MatchesBruteForceOverTheSpan) {
  std::mt19937_64 rng(2024);
  for (const LossSpec& loss : {LossSpec::huber(1.345), LossSpec::bisquare(4.685)}) {
    for (int rep = 0; rep < 6; ++rep) {
      const FunctionalSample s = random_sample(5, 10, rng, rep % 2 ? 6.0 : 0.0);
      const ScaleFunction sigma = funmad(s);
      const RobustLocation r = m_estimate(s, loss, sigma, tight());
      const auto rows = rows_of(s);
      const auto J = [&](const Vec& y) { return objective_oracle(s, loss, sigma.values(), y); };
      const double brute = testing::brute_force_span_minimum(rows, J, 31 + rep);
      EXPECT_NEAR(r.objective, brute, 1e-6) << loss.describe() << " rep " << rep;
      const Vec y(r.location.values().begin(), r.location.values().end());
      EXPECT_NEAR(J(y), r.objective, 1e-12);
    }
  }
}

TEST(MEstimate, WeightsAreNormalized) {
  std::mt19937_64 rng(5);
  const FunctionalSample s = random_sample(15, 8, rng, 10.0);
  for (const LossSpec& loss : {LossSpec::median(), LossSpec::huber(1.345), LossSpec::bisquare(4.685),
                               LossSpec::hampel(1.382, 2.764, 5.528), LossSpec::optimal(0.01318)}) {
    const RobustLocation r = m_estimate(s, loss, funmad(s));
    double total = 0.0;
    for (double w : r.weights) {
      EXPECT_GE(w, 0.0);
      total += w;
    }
    EXPECT_NEAR(total, 1.0, 1e-10) << loss.describe();
    EXPECT_TRUE(std::isfinite(r.objective));
  }
}

TEST(MEstimate, TranslationEquivariance) {
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 10; ++rep) {
    const FunctionalSample s = random_sample(12, 9, rng, rep % 2 ? 5.0 : 0.0);
    const GridFunction h = GridFunction::from_1d(s.grid(), [rep](double t) { return rep * std::sin(7 * t); });
    const LossSpec loss = LossSpec::bisquare(4.685);
    const ScaleFunction sigma = funmad(s);
    const RobustLocation base = m_estimate(s, loss, sigma);
    const RobustLocation moved = m_estimate(s.shifted(h), loss, sigma);
    for (std::size_t k = 0; k < h.size(); ++k) {
      EXPECT_NEAR(moved.location[k], base.location[k] + h[k], 1e-8);
    }
  }
}

TEST(MEstimate, ScaleEquivariance) {
  std::mt19937_64 rng(43);
  for (double c : {0.5, 2.0, 8.0, 3.7}) {
    const FunctionalSample s = random_sample(11, 9, rng, 4.0);
    const FunctionalSample cs = s.scaled(c);
    const ScaleFunction sigma = funmad(s);
    const ScaleFunction csigma = funmad(cs);
    for (std::size_t k = 0; k < sigma.values().size(); ++k) {
      if (std::exp2(std::round(std::log2(c))) == c) {
        EXPECT_EQ(csigma[k], c * sigma[k]);
      } else {
        EXPECT_NEAR(csigma[k], c * sigma[k], 1e-12 * c * sigma[k]);
      }
    }
    const LossSpec loss = LossSpec::huber(1.345);
    const RobustLocation r = m_estimate(s, loss, sigma);
    const RobustLocation cr = m_estimate(cs, loss, csigma);
    for (std::size_t k = 0; k < sigma.values().size(); ++k) {
      EXPECT_NEAR(cr.location[k], c * r.location[k], 1e-8);
    }
  }
}

TEST(MEstimate, PermutationInvariance) {
  std::mt19937_64 rng(47);
  const FunctionalSample s = random_sample(10, 7, rng, 6.0);
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  const FunctionalSample p = s.reassigned(order);
  const LossSpec loss = LossSpec::bisquare(4.685);
  const RobustLocation a = m_estimate(s, loss, funmad(s));
  const RobustLocation b = m_estimate(p, loss, funmad(p));
  for (std::size_t k = 0; k < a.location.size(); ++k) EXPECT_NEAR(a.location[k], b.location[k], 1e-10);
  EXPECT_NEAR(a.objective, b.objective, 1e-10);
}

TEST(MEstimate, NeverWorseThanTheInitializer) {
  std::mt19937_64 rng(53);
  for (const LossSpec& loss : {LossSpec::huber(1.345), LossSpec::bisquare(4.685),
                               LossSpec::hampel(1.382, 2.764, 5.528), LossSpec::optimal(0.01318),
                               LossSpec::median()}) {
    for (int rep = 0; rep < 15; ++rep) {
      const FunctionalSample s = random_sample(8, 6, rng, rep % 3 ? 7.0 : 0.0);
      const ScaleFunction sigma = funmad(s);
      for (InitKind init : {InitKind::pointwise_median, InitKind::sample_mean}) {
        IrlsConfig cfg;
        cfg.init = init;
        std::vector<std::size_t> all(s.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        const GridFunction start =
            init == InitKind::pointwise_median ? pointwise_median(s) : pointwise_mean(s, all);
        const double j0 = m_objective(s, loss, sigma, start);
        EXPECT_LE(m_estimate(s, loss, sigma, cfg).objective, j0 + 1e-12) << loss.describe();
      }
    }
  }
}

TEST(MEstimate, AllPointsRejectedFallsBackToPointwiseMedian) {
  const FunctionalSample s = constants(DomainGrid::line(3), {0.0, 1.0, 2.0});
  IrlsConfig cfg;
  cfg.init = InitKind::user;
  cfg.user_init = GridFunction::constant(s.grid(), 1000.0);
  const RobustLocation r = m_estimate(s, LossSpec::bisquare(4.685), ScaleFunction::unit(s.grid()), cfg);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.location, pointwise_median(s));
  for (double w : r.weights) EXPECT_NEAR(w, 1.0 / 3.0, 1e-15);
}

TEST(MEstimate, PerfectFitStopsImmediately) {
  const DomainGrid g = DomainGrid::line(5);
  const GridFunction f = GridFunction::from_1d(g, [](double t) { return t; });
  const std::vector<GridFunction> fs(6, f);
  const FunctionalSample s = FunctionalSample::from_functions(fs);
  const RobustLocation r = m_estimate(s, LossSpec::bisquare(4.685), funmad(s));
  EXPECT_EQ(r.location, f);
  EXPECT_EQ(r.objective, 0.0);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 1);
}

TEST(MEstimate, IterationCapReportsNonConvergence) {
  std::mt19937_64 rng(59);
  const FunctionalSample s = random_sample(20, 6, rng, 9.0);
  IrlsConfig cfg;
  cfg.max_iterations = 1;
  cfg.tolerance = 1e-15;
  const RobustLocation r = m_estimate(s, LossSpec::huber(1.345), funmad(s), cfg);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_TRUE(std::isfinite(r.objective));
}

TEST(MEstimate, InputErrors) {
  const FunctionalSample s = constants(DomainGrid::line(3), {0.0, 1.0});
  EXPECT_THROW(m_estimate(s, LossSpec::huber(1.0), ScaleFunction::unit(DomainGrid::line(4))),
               ShapeError);
  EXPECT_THROW(m_estimate(FunctionalSample(DomainGrid::line(3), 0, {}), LossSpec::huber(1.0),
                          ScaleFunction::unit(DomainGrid::line(3))),
               EmptyInputError);
  IrlsConfig cfg;
  cfg.init = InitKind::user;
  cfg.user_init = GridFunction::zero(DomainGrid::line(4));
  EXPECT_THROW(m_estimate(s, LossSpec::huber(1.0), ScaleFunction::unit(s.grid()), cfg), ConfigError);
}

TEST(MEstimate, MembersOverloadMatchesSubset) {
  std::mt19937_64 rng(61);
  const FunctionalSample s = random_sample(12, 5, rng, 3.0);
  const std::vector<std::size_t> members = {1, 4, 5, 9, 11};
  const FunctionalSample sub = s.subset(members);
  const LossSpec loss = LossSpec::bisquare(4.685);
  const ScaleFunction sigma = funmad(sub);
  EXPECT_EQ(funmad(s, members, {}), sigma);
  const RobustLocation a = m_estimate(s, members, loss, sigma, {});
  const RobustLocation b = m_estimate(sub, loss, sigma);
  EXPECT_EQ(a.location, b.location);
  EXPECT_EQ(a.objective, b.objective);
}

}  // namespace
}  // namespace rofanova
