#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "rofanova/error.hpp"
#include "rofanova/permtest.hpp"
#include "rofanova/simgen.hpp"

namespace rofanova {
namespace {

FunctionalSample labeled_one_way(const std::vector<double>& group_levels, std::size_t per_group,
                                 std::size_t m, Rng& rng, double noise) {
  std::normal_distribution<double> z(0.0, noise);
  std::vector<double> v;
  std::vector<Label> labels;
  for (std::size_t i = 0; i < group_levels.size(); ++i) {
    for (std::size_t k = 0; k < per_group; ++k) {
      for (std::size_t t = 0; t < m; ++t) v.push_back(group_levels[i] + z(rng));
      labels.push_back({i, 0});
    }
  }
  const std::size_t n = labels.size();
  return FunctionalSample(DomainGrid::line(m), n, std::move(v), std::move(labels),
                          group_levels.size(), 1);
}

TEST(PermutationConfig, Validation) {
  PermutationConfig c;
  c.permutations = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.alpha = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.alpha = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(PermuteManly, SingleUnitIsIdentity) {
  Rng rng = make_stream(1, 0);
  const FunctionalSample s(DomainGrid::line(3), 1, {1, 2, 3}, {{0, 0}}, 1, 1);
  EXPECT_EQ(permute_manly(s, rng), s);
}

TEST(PermuteManly, FixedSeedIsReproducible) {
  for (std::uint64_t b = 0; b < 20; ++b) {
    Rng a = make_stream(42, b);
    Rng c = make_stream(42, b);
    EXPECT_EQ(manly_order(17, a), manly_order(17, c));
  }
  Rng a = make_stream(42, 0);
  Rng c = make_stream(42, 1);
  EXPECT_NE(manly_order(17, a), manly_order(17, c));
}

TEST(PermuteManly, IsAPermutationKeepingLabels) {
  Rng rng = make_stream(3, 0);
  const FunctionalSample s = labeled_one_way({0, 1, 2}, 4, 2, rng, 1.0);
  const FunctionalSample p = permute_manly(s, rng);
  EXPECT_EQ(p.labels(), s.labels());
  std::vector<double> a(s.values().begin(), s.values().end());
  std::vector<double> b(p.values().begin(), p.values().end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
}

TEST(PermuteManly, UniformOverPermutationsOfThree) {
  std::map<std::vector<std::size_t>, int> freq;
  const int draws = 10000;
  for (int d = 0; d < draws; ++d) {
    Rng rng = make_stream(2023, static_cast<std::uint64_t>(d));
    ++freq[manly_order(3, rng)];
  }
  ASSERT_EQ(freq.size(), 6u);
  double chi2 = 0.0;
  const double expected = draws / 6.0;
  for (const auto& [perm, count] : freq) {
    EXPECT_NEAR(count / static_cast<double>(draws), 1.0 / 6.0, 0.02);
    chi2 += (count - expected) * (count - expected) / expected;
  }
  // 99.9% quantile of chi-square with 5 degrees of freedom.
  EXPECT_LT(chi2, 20.515);
}

TEST(PValue, Extremes) {
  const std::vector<double> perm = {1.0, 2.0, 3.0, 4.0};
  EXPECT_EQ(permutation_p_value(0.5, perm), 1.0);
  EXPECT_EQ(permutation_p_value(10.0, perm), 0.0);
  EXPECT_EQ(permutation_p_value(3.0, perm), 0.5);
  EXPECT_EQ(permutation_p_value(10.0, perm, true), 0.2);
  EXPECT_THROW(permutation_p_value(1.0, std::vector<double>{}), EmptyInputError);
}

TEST(PValue, MonotoneInObservedStatistic) {
  Rng rng = make_stream(5, 0);
  std::normal_distribution<double> z;
  std::vector<double> perm(257);
  for (double& x : perm) x = z(rng);
  double last = 1.0;
  for (double f = -4.0; f <= 4.0; f += 0.01) {
    const double p = permutation_p_value(f, perm);
    EXPECT_LE(p, last);
    last = p;
  }
}

TEST(RunTest, SeparatedGroupsReject) {
  const DomainGrid g = DomainGrid::line(5);
  std::vector<GridFunction> fs;
  std::vector<Label> labels;
  for (int u = 0; u < 10; ++u) {
    fs.push_back(GridFunction::constant(g, u < 5 ? 0.0 : 10.0));
    labels.push_back({static_cast<std::size_t>(u / 5), 0});
  }
  const FunctionalSample s = FunctionalSample::from_functions(fs, labels, 2, 1);
  const DesignSpec d = DesignSpec::from_sample(s, DesignKind::one_way);
  PermutationConfig pc;
  pc.permutations = 200;
  pc.seed = 11;
  const FanovaReport r = run_test(s, d, LossSpec::huber(1.345), {}, pc);
  ASSERT_EQ(r.results.size(), 1u);
  EXPECT_LE(r.result(Hypothesis::A).p_value, 0.05);
  EXPECT_TRUE(r.result(Hypothesis::A).reject);
  EXPECT_TRUE(r.any_rejected());
}

TEST(RunTest, PValuesAreMultiplesOfOneOverB) {
  Rng rng = make_stream(8, 0);
  Scenario2Spec spec;
  spec.a = 0.1;
  spec.b = 0.05;
  const FunctionalSample s = generate_scenario2(spec, rng);
  const DesignSpec d = DesignSpec::from_sample(s, DesignKind::two_way);
  for (std::size_t B : {1u, 7u, 40u}) {
    PermutationConfig pc;
    pc.permutations = B;
    const FanovaReport r = run_test(s, d, LossSpec::bisquare(4.685), {}, pc);
    ASSERT_EQ(r.results.size(), 3u);
    for (const HypothesisResult& h : r.results) {
      EXPECT_GE(h.p_value, 0.0);
      EXPECT_LE(h.p_value, 1.0);
      EXPECT_EQ(h.p_value * static_cast<double>(B), static_cast<double>(h.exceedances));
      EXPECT_EQ(h.reject, h.p_value <= pc.alpha);
    }
  }
}

TEST(RunTest, DeterministicAcrossThreadCounts) {
  Rng rng = make_stream(9, 0);
  Scenario2Spec spec;
  spec.a = 0.25;
  spec.b = 0.1;
  spec.contamination = Contamination::C2;
  const FunctionalSample s = generate_scenario2(spec, rng);
  const DesignSpec d = DesignSpec::from_sample(s, DesignKind::two_way);
  PermutationConfig pc;
  pc.permutations = 60;
  pc.seed = 77;
  std::vector<FanovaReport> reports;
  for (unsigned t : {1u, 3u, 8u}) {
    pc.threads = t;
    reports.push_back(run_test(s, d, LossSpec::calibrated(LossFamily::hampel), {}, pc));
  }
  for (std::size_t k = 1; k < reports.size(); ++k) {
    for (std::size_t h = 0; h < 3; ++h) {
      EXPECT_EQ(reports[k].results[h].p_value, reports[0].results[h].p_value);
      EXPECT_EQ(reports[k].results[h].observed, reports[0].results[h].observed);
    }
    EXPECT_EQ(reports[k].nonconverged_fits, reports[0].nonconverged_fits);
  }
}

TEST(RunTest, DesignMismatchIsADesignError) {
  Rng rng = make_stream(10, 0);
  const FunctionalSample s = labeled_one_way({0, 1}, 4, 3, rng, 1.0);
  DesignSpec d = DesignSpec::from_sample(s, DesignKind::one_way);
  d.counts = {5, 3};
  EXPECT_THROW(run_test(s, d, LossSpec::huber(1.345), {}, {}), DesignError);
}

TEST(RunTest, StrongM3SignalBeatsItsPermutationDistribution) {
  Scenario1Spec spec;
  spec.model = Model::M3;
  const Scenario1Generator gen(spec);
  const LossSpec loss = LossSpec::calibrated(LossFamily::bisquare);
  int hits = 0;
  for (std::uint64_t r = 0; r < 100; ++r) {
    Rng rng = make_stream(314, r);
    const FunctionalSample s = gen(rng);
    const DesignSpec d = DesignSpec::from_sample(s, DesignKind::one_way);
    PermutationConfig pc;
    pc.permutations = 100;
    pc.seed = r;
    const FanovaReport rep = run_test(s, d, loss, {}, pc);
    // Exceeding the 95th percentile of the permutation distribution.
    const bool beyond = rep.observed.f_a > 0.0 && rep.result(Hypothesis::A).exceedances < 5;
    hits += beyond ? 1 : 0;
  }
  EXPECT_GE(hits, 90);
}

TEST(BinomialStdError, PublishedMaximum) {
  EXPECT_NEAR(binomial_std_error(0.5, 500), 0.0224, 5e-5);
  EXPECT_EQ(binomial_std_error(0.0, 10), 0.0);
  EXPECT_THROW(binomial_std_error(0.5, 0), EmptyInputError);
  double worst = 0.0;
  for (int k = 0; k <= 500; ++k) worst = std::max(worst, binomial_std_error(k / 500.0, 500));
  EXPECT_NEAR(worst, 0.0224, 5e-5);
}

TEST(EmpiricalRates, ForcedRejectionGivesOne) {
  const SampleGenerator separated = [](Rng&) {
    const DomainGrid g = DomainGrid::line(4);
    std::vector<GridFunction> fs;
    std::vector<Label> labels;
    for (int u = 0; u < 12; ++u) {
      fs.push_back(GridFunction::constant(g, u < 6 ? 0.0 : 50.0 + u));
      labels.push_back({static_cast<std::size_t>(u / 6), 0});
    }
    return FunctionalSample::from_functions(fs, labels, 2, 1);
  };
  PermutationConfig pc;
  pc.permutations = 100;
  const RateEstimate r = empirical_rate(separated, DesignKind::one_way, LossSpec::huber(1.345), {},
                                        pc, 1, Hypothesis::A);
  EXPECT_EQ(r.rate, 1.0);
  EXPECT_EQ(r.replications, 1u);
  EXPECT_EQ(r.std_error, 0.0);
}

TEST(EmpiricalRates, ExchangeableNullControlsSize) {
  // One population split at random into two groups.
  const SampleGenerator null_split = [](Rng& rng) {
    std::normal_distribution<double> z;
    std::vector<double> v(16 * 6);
    for (double& x : v) x = z(rng);
    std::vector<Label> labels;
    for (std::size_t u = 0; u < 16; ++u) labels.push_back({u % 2, 0});
    return FunctionalSample(DomainGrid::line(6), 16, std::move(v), std::move(labels), 2, 1);
  };
  PermutationConfig pc;
  pc.permutations = 100;
  pc.seed = 4242;
  const RateEstimate r = empirical_rate(null_split, DesignKind::one_way,
                                        LossSpec::calibrated(LossFamily::huber), {}, pc, 200,
                                        Hypothesis::A);
  EXPECT_GE(r.rate, 0.01);
  EXPECT_LE(r.rate, 0.10);
}

TEST(EmpiricalRates, ThreadCountDoesNotChangeRates) {
  const Scenario1Generator gen(Scenario1Spec{});
  const SampleGenerator fn = [&gen](Rng& rng) { return gen(rng); };
  PermutationConfig pc;
  pc.permutations = 20;
  pc.seed = 5;
  pc.threads = 1;
  const RateSummary a = empirical_rates(fn, DesignKind::one_way, LossSpec::bisquare(4.685), {}, pc, 12);
  pc.threads = 4;
  const RateSummary b = empirical_rates(fn, DesignKind::one_way, LossSpec::bisquare(4.685), {}, pc, 12);
  EXPECT_EQ(a.rate(Hypothesis::A).rejections, b.rate(Hypothesis::A).rejections);
  EXPECT_EQ(a.nonconverged_fits, b.nonconverged_fits);
  EXPECT_THROW(empirical_rates(fn, DesignKind::one_way, LossSpec::bisquare(4.685), {}, pc, 0),
               ConfigError);
}

}  // namespace
}  // namespace rofanova
