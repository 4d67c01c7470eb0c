#include "rofanova/fanova.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <string>

#include "rofanova/error.hpp"

namespace rofanova {

namespace {

struct Partition {
  std::vector<std::size_t> all;
  std::vector<std::vector<std::size_t>> rows;
  std::vector<std::vector<std::size_t>> cols;
  std::vector<std::vector<std::size_t>> cells;
};

Partition partition(const FunctionalSample& sample, const DesignSpec& design) {
  Partition p;
  p.rows.resize(design.levels_a);
  p.cols.resize(design.levels_b);
  p.cells.resize(design.levels_a * design.levels_b);
  for (std::size_t u = 0; u < sample.size(); ++u) {
    const Label& l = sample.label(u);
    const std::size_t j = design.kind == DesignKind::one_way ? 0 : l.b;
    p.all.push_back(u);
    p.rows[l.a].push_back(u);
    p.cols[j].push_back(u);
    p.cells[design.cell_index(l.a, j)].push_back(u);
  }
  return p;
}

// Sum over units of rho(||(X_u - center(cell of u)) / s_e||).
double dispersion(const FunctionalSample& sample, const DesignSpec& design, const LossSpec& loss,
                  std::span<const double> inv_scale,
                  const std::vector<std::vector<double>>& cell_centers) {
  const double cw = sample.grid().cell_weight();
  double total = 0.0;
  for (std::size_t u = 0; u < sample.size(); ++u) {
    const Label& l = sample.label(u);
    const std::size_t j = design.kind == DesignKind::one_way ? 0 : l.b;
    const auto& center = cell_centers[design.cell_index(l.a, j)];
    const auto x = sample.row(u);
    double ss = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double r = (x[k] - center[k]) * inv_scale[k];
      ss += r * r;
    }
    total += loss.rho(std::sqrt(ss * cw));
  }
  return total;
}

std::vector<double> values_of(const RobustLocation& loc) {
  return {loc.location.values().begin(), loc.location.values().end()};
}

// sum_s coef_s * loc_s, pointwise.
std::vector<double> linear(std::initializer_list<std::pair<double, const RobustLocation*>> terms) {
  std::vector<double> out;
  for (const auto& [coef, loc] : terms) {
    const auto v = loc->location.values();
    if (out.empty()) out.assign(v.size(), 0.0);
    for (std::size_t k = 0; k < v.size(); ++k) out[k] += coef * v[k];
  }
  return out;
}

void require_labels(const FunctionalSample& sample) {
  if (!sample.has_labels()) throw DesignError("sample carries no factor labels");
}

}  // namespace

std::string_view to_string(DesignKind kind) {
  return kind == DesignKind::one_way ? "one-way" : "two-way";
}

DesignKind parse_design_kind(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  std::replace(s.begin(), s.end(), '_', '-');
  if (s == "one-way" || s == "oneway" || s == "1") return DesignKind::one_way;
  if (s == "two-way" || s == "twoway" || s == "2") return DesignKind::two_way;
  throw ConfigError("unknown design '" + std::string(name) + "'");
}

std::string_view to_string(Hypothesis h) {
  switch (h) {
    case Hypothesis::A:
      return "A";
    case Hypothesis::B:
      return "B";
    case Hypothesis::AB:
      return "AB";
  }
  return "?";
}

std::vector<Hypothesis> hypotheses(const DesignSpec& design) {
  if (design.kind == DesignKind::one_way) return {Hypothesis::A};
  return {Hypothesis::A, Hypothesis::B, Hypothesis::AB};
}

DesignSpec DesignSpec::from_sample(const FunctionalSample& sample, DesignKind kind) {
  require_labels(sample);
  DesignSpec d;
  d.kind = kind;
  d.levels_a = sample.levels_a();
  d.levels_b = kind == DesignKind::one_way ? 1 : sample.levels_b();
  if (d.levels_a < 2) throw DesignError("factor A needs at least two levels");
  if (kind == DesignKind::two_way && d.levels_b < 2) {
    throw DesignError("factor B needs at least two levels for a two-way design");
  }
  d.counts.assign(d.levels_a * d.levels_b, 0);
  for (const Label& l : sample.labels()) {
    const std::size_t j = kind == DesignKind::one_way ? 0 : l.b;
    ++d.counts[d.cell_index(l.a, j)];
  }
  for (std::size_t i = 0; i < d.levels_a; ++i) {
    for (std::size_t j = 0; j < d.levels_b; ++j) {
      if (d.count(i, j) == 0) {
        throw DesignError("design cell (" + std::to_string(i) + "," + std::to_string(j) +
                          ") is empty");
      }
    }
  }
  return d;
}

std::size_t DesignSpec::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

void DesignSpec::validate_against(const FunctionalSample& sample) const {
  require_labels(sample);
  if (levels_a < 2) throw DesignError("factor A needs at least two levels");
  if (kind == DesignKind::one_way && levels_b != 1) {
    throw DesignError("one-way designs have a single level of factor B");
  }
  if (kind == DesignKind::two_way && levels_b < 2) {
    throw DesignError("factor B needs at least two levels for a two-way design");
  }
  if (counts.size() != levels_a * levels_b) throw DesignError("cell count table has wrong size");
  if (total() != sample.size()) throw DesignError("cell counts do not add up to the sample size");
  std::vector<std::size_t> seen(counts.size(), 0);
  for (const Label& l : sample.labels()) {
    const std::size_t j = kind == DesignKind::one_way ? 0 : l.b;
    if (l.a >= levels_a || j >= levels_b) throw DesignError("label outside the design");
    ++seen[cell_index(l.a, j)];
  }
  if (seen != counts) throw DesignError("labels do not match the declared cell counts");
  for (std::size_t c : counts) {
    if (c == 0) throw DesignError("every declared cell must be nonempty");
  }
}

std::size_t RobustFit::nonconverged() const {
  std::size_t n = grand.converged ? 0 : 1;
  for (const auto* group : {&rows, &cols, &cells}) {
    for (const RobustLocation& r : *group) n += r.converged ? 0 : 1;
  }
  return n;
}

std::size_t RobustFit::degenerate() const {
  std::size_t n = grand.degenerate ? 1 : 0;
  for (const auto* group : {&rows, &cols, &cells}) {
    for (const RobustLocation& r : *group) n += r.degenerate ? 1 : 0;
  }
  return n;
}

RobustFit fit_robust(const FunctionalSample& sample, const DesignSpec& design, const LossSpec& loss,
                     const IrlsConfig& cfg, const FitOptions& options) {
  design.validate_against(sample);
  // Least squares is the classical comparator: its statistics are the plain
  // dispersion drops, never studentized by a robust scale.
  FitOptions opts = options;
  if (loss.family() == LossFamily::least_squares) opts.unit_scale = true;
  if (sample.size() < 2) throw InsufficientSampleError("a fit needs at least two functions");
  const Partition p = partition(sample, design);
  const DomainGrid& grid = sample.grid();

  const auto scale_of = [&](const std::vector<std::size_t>& members) {
    return opts.unit_scale ? ScaleFunction::unit(grid) : funmad(sample, members, cfg);
  };

  const ScaleFunction grand_scale = scale_of(p.all);
  RobustFit fit{m_estimate(sample, p.all, loss, grand_scale, cfg),
                {},
                {},
                {},
                grand_scale,
                {},
                {},
                {},
                ScaleFunction::unit(grid),
                {}};

  const auto group_scale = [&](const std::vector<std::size_t>& members) {
    return members.size() < 2 && !opts.unit_scale ? grand_scale : scale_of(members);
  };

  for (std::size_t c = 0; c < p.cells.size(); ++c) {
    if (p.cells[c].size() < 2 && !opts.unit_scale) fit.substituted_cells.push_back(c);
    fit.cell_scales.push_back(group_scale(p.cells[c]));
    fit.cells.push_back(m_estimate(sample, p.cells[c], loss, fit.cell_scales.back(), cfg));
  }

  // Residual scale from the cell residuals over all units.
  if (opts.unit_scale) {
    fit.residual_scale = ScaleFunction::unit(grid);
  } else {
    const std::size_t m = sample.grid_size();
    std::vector<double> out(m);
    std::vector<double> column(sample.size());
    for (std::size_t k = 0; k < m; ++k) {
      for (std::size_t u = 0; u < sample.size(); ++u) {
        const Label& l = sample.label(u);
        const std::size_t j = design.kind == DesignKind::one_way ? 0 : l.b;
        column[u] = std::abs(sample.row(u)[k] - fit.cells[design.cell_index(l.a, j)].location[k]);
      }
      out[k] = median_inplace(column) / kMadConsistency;
    }
    fit.residual_scale = ScaleFunction(GridFunction(grid, std::move(out)));
  }

  if (opts.residual_scale_for_cells) {
    // Two stages: s_e comes from the per-cell fits above.
    for (std::size_t c = 0; c < p.cells.size(); ++c) {
      fit.cell_scales[c] = fit.residual_scale;
      fit.cells[c] = m_estimate(sample, p.cells[c], loss, fit.residual_scale, cfg);
    }
  }

  if (design.kind == DesignKind::one_way) {
    fit.rows = fit.cells;
    fit.row_scales = fit.cell_scales;
  } else {
    for (const auto& members : p.rows) {
      fit.row_scales.push_back(group_scale(members));
      fit.rows.push_back(m_estimate(sample, members, loss, fit.row_scales.back(), cfg));
    }
    for (const auto& members : p.cols) {
      fit.col_scales.push_back(group_scale(members));
      fit.cols.push_back(m_estimate(sample, members, loss, fit.col_scales.back(), cfg));
    }
  }
  return fit;
}

double FanovaStatistics::get(Hypothesis h) const {
  switch (h) {
    case Hypothesis::A:
      return f_a;
    case Hypothesis::B:
      if (!f_b) throw DesignError("F_B is not defined for this design");
      return *f_b;
    case Hypothesis::AB:
      if (!f_ab) throw DesignError("F_AB is not defined for this design");
      return *f_ab;
  }
  throw DesignError("unknown hypothesis");
}

double statistic(Hypothesis h, const FunctionalSample& sample, const RobustFit& fit,
                 const DesignSpec& design, const LossSpec& loss, double scale_floor) {
  if (h != Hypothesis::A && design.kind == DesignKind::one_way) {
    throw DesignError("only factor A is testable in a one-way design");
  }
  const std::size_t I = design.levels_a;
  const std::size_t J = design.levels_b;
  const std::vector<double> inv = fit.residual_scale.floored_inverse(scale_floor);

  std::vector<std::vector<double>> full(I * J);
  std::vector<std::vector<double>> reduced(I * J);
  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t j = 0; j < J; ++j) {
      const std::size_t c = design.cell_index(i, j);
      full[c] = values_of(fit.cells[c]);
      switch (h) {
        case Hypothesis::A:
          reduced[c] = linear({{1.0, &fit.grand}, {1.0, &fit.cells[c]}, {-1.0, &fit.rows[i]}});
          break;
        case Hypothesis::B:
          reduced[c] = linear({{1.0, &fit.grand}, {1.0, &fit.cells[c]}, {-1.0, &fit.cols[j]}});
          break;
        case Hypothesis::AB:
          reduced[c] = linear({{1.0, &fit.rows[i]}, {1.0, &fit.cols[j]}, {-1.0, &fit.grand}});
          break;
      }
    }
  }

  double df = 0.0;
  switch (h) {
    case Hypothesis::A:
      df = static_cast<double>(I - 1);
      break;
    case Hypothesis::B:
      df = static_cast<double>(J - 1);
      break;
    case Hypothesis::AB:
      df = static_cast<double>((I - 1) * (J - 1));
      break;
  }
  const double drop = dispersion(sample, design, loss, inv, reduced) -
                      dispersion(sample, design, loss, inv, full);
  return drop / df;
}

double statistic_fa(const FunctionalSample& sample, const RobustFit& fit, const DesignSpec& design,
                    const LossSpec& loss, double scale_floor) {
  return statistic(Hypothesis::A, sample, fit, design, loss, scale_floor);
}

double statistic_fb(const FunctionalSample& sample, const RobustFit& fit, const DesignSpec& design,
                    const LossSpec& loss, double scale_floor) {
  return statistic(Hypothesis::B, sample, fit, design, loss, scale_floor);
}

double statistic_fab(const FunctionalSample& sample, const RobustFit& fit, const DesignSpec& design,
                     const LossSpec& loss, double scale_floor) {
  return statistic(Hypothesis::AB, sample, fit, design, loss, scale_floor);
}

FanovaStatistics compute_statistics(const FunctionalSample& sample, const RobustFit& fit,
                                    const DesignSpec& design, const LossSpec& loss,
                                    double scale_floor) {
  FanovaStatistics s;
  s.f_a = statistic_fa(sample, fit, design, loss, scale_floor);
  if (design.kind == DesignKind::two_way) {
    s.f_b = statistic_fb(sample, fit, design, loss, scale_floor);
    s.f_ab = statistic_fab(sample, fit, design, loss, scale_floor);
  }
  return s;
}

}  // namespace rofanova
