#pragma once

// Permutation tests under the Manly scheme: the raw functions are permuted
// across all design cells without restriction, the full robust fit and every
// statistic are recomputed on each permuted sample, and
//     p = (1/B) sum_b I(F*_b >= F_obs).
//
// Permutation b draws from its own RNG stream derived from (seed, b), so a
// report is bitwise identical for any worker count.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rofanova/fanova.hpp"
#include "rofanova/rng.hpp"

namespace rofanova {

struct PermutationConfig {
  std::size_t permutations = 1000;  // B
  std::uint64_t seed = 0;
  double alpha = 0.05;
  /// Report (1 + count) / (1 + B) instead of count / B.
  bool add_one = false;
  unsigned threads = 1;  // 0 = all hardware threads

  void validate() const;
};

struct HypothesisResult {
  Hypothesis hypothesis = Hypothesis::A;
  double observed = 0.0;
  double p_value = 1.0;
  std::size_t exceedances = 0;  // permuted statistics >= observed
  bool reject = false;          // p <= alpha
};

struct FanovaReport {
  FanovaStatistics observed;
  std::vector<HypothesisResult> results;
  std::size_t permutations = 0;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  std::size_t nonconverged_fits = 0;  // IRLS runs, observed and permuted
  std::size_t degenerate_fits = 0;
  std::size_t substituted_cell_scales = 0;  // in the observed fit

  const HypothesisResult& result(Hypothesis h) const;
  bool any_rejected() const;
};

/// Uniform random permutation of 0..n-1 by Fisher-Yates.
std::vector<std::size_t> manly_order(std::size_t n, Rng& rng);

/// Functions reassigned to slots by a uniform permutation; the label layout is kept.
FunctionalSample permute_manly(const FunctionalSample& sample, Rng& rng);

double permutation_p_value(double observed, std::span<const double> permuted, bool add_one = false);

FanovaReport run_test(const FunctionalSample& sample, const DesignSpec& design,
                      const LossSpec& loss, const IrlsConfig& irls,
                      const PermutationConfig& perm, const FitOptions& fit_options = {});

struct RateEstimate {
  Hypothesis hypothesis = Hypothesis::A;
  double rate = 0.0;
  double std_error = 0.0;
  std::size_t rejections = 0;
  std::size_t replications = 0;
};

/// sqrt(r (1 - r) / n).
double binomial_std_error(double rate, std::size_t replications);

using SampleGenerator = std::function<FunctionalSample(Rng&)>;

struct RateSummary {
  std::vector<RateEstimate> rates;  // one per hypothesis of the design
  double mean_seconds = 0.0;        // wall time per replication
  std::size_t nonconverged_fits = 0;

  const RateEstimate& rate(Hypothesis h) const;
};

/// Runs the permutation test on `replications` freshly generated samples.
/// Replication r draws its data from stream 2r of perm.seed and seeds its
/// permutations with stream 2r + 1; replications run on perm.threads workers.
RateSummary empirical_rates(const SampleGenerator& generate, DesignKind kind, const LossSpec& loss,
                            const IrlsConfig& irls, const PermutationConfig& perm,
                            std::size_t replications, const FitOptions& fit_options = {});

RateEstimate empirical_rate(const SampleGenerator& generate, DesignKind kind, const LossSpec& loss,
                            const IrlsConfig& irls, const PermutationConfig& perm,
                            std::size_t replications, Hypothesis hypothesis);

}  // namespace rofanova
