#include "rofanova/robust.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rofanova/error.hpp"

namespace rofanova {

namespace {

constexpr double kCoincidence = 1e-12;

std::vector<std::size_t> all_members(const FunctionalSample& sample) {
  std::vector<std::size_t> v(sample.size());
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

// Residual geometry of one subset under a fixed scale.
class ScaledRows {
 public:
  ScaledRows(const FunctionalSample& sample, std::span<const std::size_t> members,
             const ScaleFunction& sigma, double floor)
      : sample_(sample),
        members_(members),
        inv_sigma_(sigma.floored_inverse(floor)),
        cell_weight_(sample.grid().cell_weight()) {}

  std::size_t count() const { return members_.size(); }
  std::size_t grid_size() const { return inv_sigma_.size(); }
  std::span<const double> row(std::size_t j) const { return sample_.row(members_[j]); }

  double distance(std::size_t j, std::span<const double> y) const {
    const auto x = row(j);
    double ss = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double r = (x[k] - y[k]) * inv_sigma_[k];
      ss += r * r;
    }
    return std::sqrt(ss * cell_weight_);
  }

  void distances(std::span<const double> y, std::vector<double>& out) const {
    out.resize(count());
    for (std::size_t j = 0; j < count(); ++j) out[j] = distance(j, y);
  }

  void combine(std::span<const double> w, std::vector<double>& y) const {
    y.assign(grid_size(), 0.0);
    for (std::size_t j = 0; j < count(); ++j) {
      if (w[j] == 0.0) continue;
      const auto x = row(j);
      for (std::size_t k = 0; k < y.size(); ++k) y[k] += w[j] * x[k];
    }
  }

  // L2 norm, in scaled coordinates, of sum over non-coincident units of
  // (X_j - y) / (sigma d_j): the pull of the rest of the sample on y.
  double pull(std::span<const double> y, std::span<const double> d) const {
    std::vector<double> acc(grid_size(), 0.0);
    for (std::size_t j = 0; j < count(); ++j) {
      if (d[j] < kCoincidence) continue;
      const auto x = row(j);
      for (std::size_t k = 0; k < acc.size(); ++k) {
        acc[k] += (x[k] - y[k]) * inv_sigma_[k] / d[j];
      }
    }
    double ss = 0.0;
    for (double v : acc) ss += v * v;
    return std::sqrt(ss * cell_weight_);
  }

 private:
  const FunctionalSample& sample_;
  std::span<const std::size_t> members_;
  std::vector<double> inv_sigma_;
  double cell_weight_;
};

double objective_of(const LossSpec& loss, std::span<const double> d) {
  double j = 0.0;
  for (double v : d) j += loss.rho(v);
  return j;
}

enum class WeightStatus { ok, at_optimum, all_zero };

// Normalized IRLS weights for the next iterate. For the median loss an
// iterate on a data function either is optimal or gets a Vardi-Zhang step.
WeightStatus next_weights(const LossSpec& loss, const ScaledRows& rows, std::span<const double> y,
                          std::span<const double> d, std::vector<double>& w) {
  const std::size_t n = d.size();
  w.assign(n, 0.0);

  if (loss.family() == LossFamily::median) {
    std::size_t coincident = 0;
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (d[j] < kCoincidence) {
        ++coincident;
      } else {
        w[j] = 1.0 / d[j];
        total += w[j];
      }
    }
    if (coincident == 0) {
      for (double& v : w) v /= total;
      return WeightStatus::ok;
    }
    if (coincident == n) {
      std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(n));
      return WeightStatus::at_optimum;
    }
    const double eta = static_cast<double>(coincident);
    const double r = rows.pull(y, d);
    if (r <= eta) {
      for (std::size_t j = 0; j < n; ++j) {
        w[j] = d[j] < kCoincidence ? 1.0 / eta : 0.0;
      }
      return WeightStatus::at_optimum;
    }
    const double stay = eta / r;
    for (std::size_t j = 0; j < n; ++j) {
      w[j] = d[j] < kCoincidence ? stay / eta : (1.0 - stay) * w[j] / total;
    }
    return WeightStatus::ok;
  }

  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    w[j] = loss.weight(d[j]);
    total += w[j];
  }
  if (!(total > 0.0)) return WeightStatus::all_zero;
  for (double& v : w) v /= total;
  return WeightStatus::ok;
}

std::vector<double> initial_location(const FunctionalSample& sample,
                                     std::span<const std::size_t> members, const IrlsConfig& cfg) {
  switch (cfg.init) {
    case InitKind::pointwise_median: {
      const GridFunction g = pointwise_median(sample, members);
      return {g.values().begin(), g.values().end()};
    }
    case InitKind::sample_mean: {
      const GridFunction g = pointwise_mean(sample, members);
      return {g.values().begin(), g.values().end()};
    }
    case InitKind::user:
      if (!cfg.user_init || !(cfg.user_init->grid() == sample.grid())) {
        throw ConfigError("user initializer missing or on a different grid");
      }
      return {cfg.user_init->values().begin(), cfg.user_init->values().end()};
  }
  throw ConfigError("unknown initializer");
}

RobustLocation irls(const FunctionalSample& sample, std::span<const std::size_t> members,
                    const LossSpec& loss, const ScaleFunction& sigma, const IrlsConfig& cfg) {
  cfg.validate();
  if (members.empty()) throw EmptyInputError("M-estimation needs a nonempty sample");
  if (!(sigma.grid() == sample.grid())) throw ShapeError("scale lives on a different grid");

  const ScaledRows rows(sample, members, sigma, cfg.scale_floor);
  const std::size_t n = members.size();

  std::vector<double> y = initial_location(sample, members, cfg);
  std::vector<double> d;
  std::vector<double> w;
  rows.distances(y, d);
  double current = objective_of(loss, d);

  RobustLocation out{GridFunction(sample.grid(), y), {}, 0, current, true, false};
  const auto finish = [&](std::span<const double> best_y, std::vector<double> best_w) {
    out.location = GridFunction(sample.grid(), {best_y.begin(), best_y.end()});
    out.weights = std::move(best_w);
    return out;
  };

  WeightStatus status = next_weights(loss, rows, y, d, w);
  if (status == WeightStatus::all_zero) {
    const GridFunction fallback = pointwise_median(sample, members);
    rows.distances(fallback.values(), d);
    out.objective = objective_of(loss, d);
    out.degenerate = true;
    return finish(fallback.values(), std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }
  if (status == WeightStatus::at_optimum || current < cfg.scale_floor) {
    return finish(y, w);
  }

  std::vector<double> best_y = y;
  std::vector<double> best_w = w;
  double best = current;
  out.converged = false;

  for (int k = 1; k <= cfg.max_iterations; ++k) {
    rows.combine(w, y);
    rows.distances(y, d);
    const double next = objective_of(loss, d);
    out.iterations = k;
    status = next_weights(loss, rows, y, d, w);
    if (next < best) {
      best = next;
      best_y = y;
      best_w = w;
    }
    if (status == WeightStatus::all_zero) {
      out.degenerate = true;
      break;
    }
    const bool settled = std::abs(next - current) / current < cfg.tolerance;
    current = next;
    if (settled || status == WeightStatus::at_optimum || current < cfg.scale_floor) {
      out.converged = true;
      break;
    }
  }

  if (std::accumulate(best_w.begin(), best_w.end(), 0.0) <= 0.0) {
    best_w.assign(n, 1.0 / static_cast<double>(n));
  }
  out.objective = best;
  return finish(best_y, std::move(best_w));
}

}  // namespace

void IrlsConfig::validate() const {
  if (!(tolerance > 0.0)) throw ConfigError("IRLS tolerance must be positive");
  if (max_iterations < 1) throw ConfigError("IRLS needs at least one iteration");
  if (!(scale_floor > 0.0)) throw ConfigError("scale floor must be positive");
  if (init == InitKind::user && !user_init) throw ConfigError("user initializer not supplied");
}

ScaleFunction::ScaleFunction(GridFunction values) : values_(std::move(values)) {
  for (double v : values_.values()) {
    if (v < 0.0) throw DomainError("scale function must be nonnegative");
  }
}

ScaleFunction ScaleFunction::unit(const DomainGrid& grid) {
  return ScaleFunction(GridFunction::constant(grid, 1.0));
}

std::vector<double> ScaleFunction::floored_inverse(double floor) const {
  std::vector<double> inv(values_.size());
  for (std::size_t k = 0; k < inv.size(); ++k) inv[k] = 1.0 / std::max(values_[k], floor);
  return inv;
}

RobustLocation functional_median(const FunctionalSample& sample,
                                 std::span<const std::size_t> members, const IrlsConfig& cfg) {
  return irls(sample, members, LossSpec::median(), ScaleFunction::unit(sample.grid()), cfg);
}

RobustLocation functional_median(const FunctionalSample& sample, const IrlsConfig& cfg) {
  const auto members = all_members(sample);
  return functional_median(sample, members, cfg);
}

ScaleFunction normalized_mad(const FunctionalSample& sample, std::span<const std::size_t> members,
                             const GridFunction& center) {
  if (members.empty()) throw EmptyInputError("MAD of an empty sample");
  const std::size_t m = sample.grid_size();
  std::vector<double> out(m);
  std::vector<double> column(members.size());
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t j = 0; j < members.size(); ++j) {
      column[j] = std::abs(sample.row(members[j])[k] - center[k]);
    }
    out[k] = median_inplace(column) / kMadConsistency;
  }
  return ScaleFunction(GridFunction(sample.grid(), std::move(out)));
}

ScaleFunction funmad(const FunctionalSample& sample, std::span<const std::size_t> members,
                     const IrlsConfig& cfg) {
  if (members.size() < 2) throw InsufficientSampleError("FuNMAD needs at least two functions");
  const RobustLocation med = functional_median(sample, members, cfg);
  return normalized_mad(sample, members, med.location);
}

ScaleFunction funmad(const FunctionalSample& sample, const IrlsConfig& cfg) {
  const auto members = all_members(sample);
  return funmad(sample, members, cfg);
}

RobustLocation m_estimate(const FunctionalSample& sample, std::span<const std::size_t> members,
                          const LossSpec& loss, const ScaleFunction& sigma, const IrlsConfig& cfg) {
  return irls(sample, members, loss, sigma, cfg);
}

RobustLocation m_estimate(const FunctionalSample& sample, const LossSpec& loss,
                          const ScaleFunction& sigma, const IrlsConfig& cfg) {
  const auto members = all_members(sample);
  return irls(sample, members, loss, sigma, cfg);
}

double m_objective(const FunctionalSample& sample, std::span<const std::size_t> members,
                   const LossSpec& loss, const ScaleFunction& sigma, std::span<const double> y,
                   double scale_floor) {
  const ScaledRows rows(sample, members, sigma, scale_floor);
  std::vector<double> d;
  rows.distances(y, d);
  return objective_of(loss, d);
}

double m_objective(const FunctionalSample& sample, const LossSpec& loss, const ScaleFunction& sigma,
                   const GridFunction& y, double scale_floor) {
  const auto members = all_members(sample);
  return m_objective(sample, members, loss, sigma, y.values(), scale_floor);
}

}  // namespace rofanova
