#pragma once

// Robust F-type statistics for one-way and two-way functional designs.
//
// Each statistic is the scaled drop in standardized residual dispersion
// between a reduced and the full (cell-mean) model:
//
//   F = df^{-1} [ sum rho(||reduced residual / s_e||) - sum rho(||(X - Xbar_ij) / s_e||) ]
//
// with reduced residuals
//   A:  X - Xbar - Xbar_ij + Xbar_i.      df = I - 1
//   B:  X - Xbar - Xbar_ij + Xbar_.j      df = J - 1
//   AB: X - Xbar_i. - Xbar_.j + Xbar      df = (I - 1)(J - 1)
// and s_e the normalized MAD of the cell residuals. Every mean is a
// scale-equivariant M-estimate with its own FuNMAD scale.

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "rofanova/grid.hpp"
#include "rofanova/loss.hpp"
#include "rofanova/robust.hpp"

namespace rofanova {

enum class DesignKind { one_way, two_way };

std::string_view to_string(DesignKind kind);
DesignKind parse_design_kind(std::string_view name);

struct DesignSpec {
  DesignKind kind = DesignKind::one_way;
  std::size_t levels_a = 0;         // I
  std::size_t levels_b = 1;         // J, 1 for one-way designs
  std::vector<std::size_t> counts;  // n_ij, row-major I x J

  /// Reads cell counts from the sample's labels. Throws DesignError when a
  /// declared cell is empty or the labels do not fit the kind.
  static DesignSpec from_sample(const FunctionalSample& sample, DesignKind kind);

  std::size_t cell_index(std::size_t i, std::size_t j) const { return i * levels_b + j; }
  std::size_t count(std::size_t i, std::size_t j) const { return counts.at(cell_index(i, j)); }
  std::size_t total() const;

  /// Throws DesignError unless the sample's labels reproduce these counts.
  void validate_against(const FunctionalSample& sample) const;
};

enum class Hypothesis { A, B, AB };

std::string_view to_string(Hypothesis h);
/// Hypotheses testable under a design: {A} or {A, B, AB}.
std::vector<Hypothesis> hypotheses(const DesignSpec& design);

struct FitOptions {
  /// Re-estimate cell means with the residual scale instead of per-cell FuNMAD.
  bool residual_scale_for_cells = false;
  /// Use sigma = 1 for every mean and for the residual scale. Always on for
  /// the least-squares loss.
  bool unit_scale = false;
};

struct RobustFit {
  RobustLocation grand;
  std::vector<RobustLocation> rows;   // per level of A
  std::vector<RobustLocation> cols;   // per level of B; empty for one-way
  std::vector<RobustLocation> cells;  // row-major I x J
  ScaleFunction grand_scale;
  std::vector<ScaleFunction> row_scales;
  std::vector<ScaleFunction> col_scales;
  std::vector<ScaleFunction> cell_scales;
  ScaleFunction residual_scale;
  /// Cells with fewer than two units; their scale is the grand scale.
  std::vector<std::size_t> substituted_cells;

  std::size_t nonconverged() const;
  std::size_t degenerate() const;
};

RobustFit fit_robust(const FunctionalSample& sample, const DesignSpec& design, const LossSpec& loss,
                     const IrlsConfig& cfg = {}, const FitOptions& opts = {});

struct FanovaStatistics {
  double f_a = 0.0;
  std::optional<double> f_b;
  std::optional<double> f_ab;

  double get(Hypothesis h) const;
};

/// Throws DesignError when the hypothesis is not defined for the design.
double statistic(Hypothesis h, const FunctionalSample& sample, const RobustFit& fit,
                 const DesignSpec& design, const LossSpec& loss, double scale_floor = 1e-10);

double statistic_fa(const FunctionalSample& sample, const RobustFit& fit, const DesignSpec& design,
                    const LossSpec& loss, double scale_floor = 1e-10);
double statistic_fb(const FunctionalSample& sample, const RobustFit& fit, const DesignSpec& design,
                    const LossSpec& loss, double scale_floor = 1e-10);
double statistic_fab(const FunctionalSample& sample, const RobustFit& fit, const DesignSpec& design,
                     const LossSpec& loss, double scale_floor = 1e-10);

FanovaStatistics compute_statistics(const FunctionalSample& sample, const RobustFit& fit,
                                    const DesignSpec& design, const LossSpec& loss,
                                    double scale_floor = 1e-10);

}  // namespace rofanova
