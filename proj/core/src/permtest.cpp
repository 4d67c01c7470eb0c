#include "rofanova/permtest.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "rofanova/error.hpp"
#include "rofanova/parallel.hpp"

namespace rofanova {

void PermutationConfig::validate() const {
  if (permutations < 1) throw ConfigError("at least one permutation is required");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
}

const HypothesisResult& FanovaReport::result(Hypothesis h) const {
  for (const HypothesisResult& r : results) {
    if (r.hypothesis == h) return r;
  }
  throw DesignError("hypothesis " + std::string(to_string(h)) + " was not tested");
}

bool FanovaReport::any_rejected() const {
  for (const HypothesisResult& r : results) {
    if (r.reject) return true;
  }
  return false;
}

std::vector<std::size_t> manly_order(std::size_t n, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(rng)]);
  }
  return order;
}

FunctionalSample permute_manly(const FunctionalSample& sample, Rng& rng) {
  const auto order = manly_order(sample.size(), rng);
  return sample.reassigned(order);
}

double permutation_p_value(double observed, std::span<const double> permuted, bool add_one) {
  if (permuted.empty()) throw EmptyInputError("no permuted statistics");
  std::size_t count = 0;
  for (double f : permuted) count += f >= observed ? 1 : 0;
  if (add_one) {
    return static_cast<double>(count + 1) / static_cast<double>(permuted.size() + 1);
  }
  return static_cast<double>(count) / static_cast<double>(permuted.size());
}

FanovaReport run_test(const FunctionalSample& sample, const DesignSpec& design,
                      const LossSpec& loss, const IrlsConfig& irls, const PermutationConfig& perm,
                      const FitOptions& fit_options) {
  perm.validate();
  irls.validate();
  design.validate_against(sample);

  const std::vector<Hypothesis> tested = hypotheses(design);
  const RobustFit observed_fit = fit_robust(sample, design, loss, irls, fit_options);

  FanovaReport report;
  report.observed = compute_statistics(sample, observed_fit, design, loss, irls.scale_floor);
  report.permutations = perm.permutations;
  report.seed = perm.seed;
  report.alpha = perm.alpha;
  report.substituted_cell_scales = observed_fit.substituted_cells.size();

  const std::size_t B = perm.permutations;
  // permuted[h * B + b]
  std::vector<double> permuted(tested.size() * B);
  std::vector<std::size_t> nonconverged(B, 0);
  std::vector<std::size_t> degenerate(B, 0);
  parallel_for(B, perm.threads, [&](std::size_t b) {
    Rng rng = make_stream(perm.seed, b);
    const FunctionalSample shuffled = permute_manly(sample, rng);
    const RobustFit fit = fit_robust(shuffled, design, loss, irls, fit_options);
    const FanovaStatistics stats = compute_statistics(shuffled, fit, design, loss, irls.scale_floor);
    for (std::size_t h = 0; h < tested.size(); ++h) permuted[h * B + b] = stats.get(tested[h]);
    nonconverged[b] = fit.nonconverged();
    degenerate[b] = fit.degenerate();
  });

  report.nonconverged_fits = observed_fit.nonconverged() +
                             std::accumulate(nonconverged.begin(), nonconverged.end(), std::size_t{0});
  report.degenerate_fits =
      observed_fit.degenerate() + std::accumulate(degenerate.begin(), degenerate.end(), std::size_t{0});

  for (std::size_t h = 0; h < tested.size(); ++h) {
    HypothesisResult r;
    r.hypothesis = tested[h];
    r.observed = report.observed.get(tested[h]);
    const std::span<const double> column(permuted.data() + h * B, B);
    for (double f : column) r.exceedances += f >= r.observed ? 1 : 0;
    r.p_value = permutation_p_value(r.observed, column, perm.add_one);
    r.reject = r.p_value <= perm.alpha;
    report.results.push_back(r);
  }
  return report;
}

double binomial_std_error(double rate, std::size_t replications) {
  if (replications == 0) throw EmptyInputError("standard error of zero replications");
  return std::sqrt(rate * (1.0 - rate) / static_cast<double>(replications));
}

const RateEstimate& RateSummary::rate(Hypothesis h) const {
  for (const RateEstimate& r : rates) {
    if (r.hypothesis == h) return r;
  }
  throw DesignError("no rate recorded for hypothesis " + std::string(to_string(h)));
}

RateSummary empirical_rates(const SampleGenerator& generate, DesignKind kind, const LossSpec& loss,
                            const IrlsConfig& irls, const PermutationConfig& perm,
                            std::size_t replications, const FitOptions& fit_options) {
  perm.validate();
  if (replications < 1) throw ConfigError("at least one replication is required");

  std::vector<FanovaReport> reports(replications);
  std::vector<double> seconds(replications, 0.0);
  parallel_for(replications, perm.threads, [&](std::size_t r) {
    const auto start = std::chrono::steady_clock::now();
    Rng data_rng = make_stream(perm.seed, 2 * r);
    const FunctionalSample sample = generate(data_rng);
    const DesignSpec design = DesignSpec::from_sample(sample, kind);
    PermutationConfig inner = perm;
    inner.seed = stream_seed(perm.seed, 2 * r + 1);
    inner.threads = 1;
    reports[r] = run_test(sample, design, loss, irls, inner, fit_options);
    seconds[r] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  RateSummary summary;
  for (const HypothesisResult& first : reports.front().results) {
    RateEstimate est;
    est.hypothesis = first.hypothesis;
    est.replications = replications;
    for (const FanovaReport& rep : reports) est.rejections += rep.result(first.hypothesis).reject;
    est.rate = static_cast<double>(est.rejections) / static_cast<double>(replications);
    est.std_error = binomial_std_error(est.rate, replications);
    summary.rates.push_back(est);
  }
  for (const FanovaReport& rep : reports) summary.nonconverged_fits += rep.nonconverged_fits;
  summary.mean_seconds =
      std::accumulate(seconds.begin(), seconds.end(), 0.0) / static_cast<double>(replications);
  return summary;
}

RateEstimate empirical_rate(const SampleGenerator& generate, DesignKind kind, const LossSpec& loss,
                            const IrlsConfig& irls, const PermutationConfig& perm,
                            std::size_t replications, Hypothesis hypothesis) {
  return empirical_rates(generate, kind, loss, irls, perm, replications).rate(hypothesis);
}

}  // namespace rofanova
