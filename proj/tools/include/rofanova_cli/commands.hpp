#pragma once

// Subcommands of the `rofanova` tool. Each writes its primary outputs plus a
// `<output stem>.manifest.json` sidecar holding the resolved configuration,
// software version and timestamp. Primary outputs never contain the thread
// count or the timestamp, so equal configurations give byte-identical files.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rofanova/fanova.hpp"
#include "rofanova/loss.hpp"
#include "rofanova/permtest.hpp"
#include "rofanova/robust.hpp"
#include "rofanova/simgen.hpp"
#include "rofanova_cli/csv.hpp"

namespace rofanova::cli {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitRejected = 2;

std::string version();

struct LossOptions {
  LossFamily family = LossFamily::bisquare;
  double efficiency = 0.95;
  /// Explicit tuning constants override calibration (b and c for Hampel only).
  std::optional<double> a, b, c;

  LossSpec make() const;
};

InitKind parse_init_kind(const std::string& name);
std::string to_string(InitKind kind);

struct TestOptions {
  std::string data_path;
  IngestSchema schema;
  LossOptions loss;
  IrlsConfig irls;
  PermutationConfig perm;
  FitOptions fit;
  std::string output_path = "report.json";
  std::string means_path;  // default: <output stem>.means.csv
  bool exit_on_reject = false;
};

struct EstimateOptions {
  std::string data_path;
  IngestSchema schema;
  LossOptions loss;
  IrlsConfig irls;
  bool unit_scale = false;
  std::string output_path = "estimate.csv";
};

struct SimulateOptions {
  int scenario = 1;
  std::vector<Model> models = {Model::M1};
  std::vector<Contamination> contaminations = {Contamination::C0};
  std::vector<int> sigma_indices = {1};
  std::vector<double> a_values = {0.0};
  std::vector<double> b_values = {0.0};
  std::vector<LossFamily> losses = {LossFamily::bisquare};
  double efficiency = 0.95;
  std::size_t replications = 500;
  std::size_t permutations = 1000;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  unsigned threads = 1;
  IrlsConfig irls;
  FitOptions fit;
  std::size_t units_per_group = 20;  // per group (scenario 1) or per cell (scenario 2)
  std::size_t grid_points = 25;
  double magnitude = 25.0;
  double probability = 0.1;
  double scenario2_sigma = 0.3;
  bool timing = true;
  std::string output_path = "rates.csv";
  std::string plot_path;  // default: <output stem>.plot.csv

  void validate() const;
};

/// Reads sweep settings from `key = value` text; list values are comma separated.
SimulateOptions simulate_options_from_config(const std::map<std::string, std::string>& entries,
                                             SimulateOptions base = {});

struct GenerateOptions {
  int scenario = 2;
  Scenario1Spec scenario1;
  Scenario2Spec scenario2;
  std::uint64_t seed = 0;
  std::string output_path = "data.csv";
};

/// Returns kExitRejected when exit_on_reject is set and a hypothesis is rejected.
int cmd_test(const TestOptions& opts, std::ostream& log);
int cmd_estimate(const EstimateOptions& opts, std::ostream& log);
int cmd_simulate(const SimulateOptions& opts, std::ostream& log);
int cmd_generate(const GenerateOptions& opts, std::ostream& log);

/// `<path without extension><suffix>`.
std::string sibling_path(const std::string& path, const std::string& suffix);

/// ISO 8601 UTC time, from SOURCE_DATE_EPOCH when it is set.
std::string manifest_timestamp();

}  // namespace rofanova::cli
