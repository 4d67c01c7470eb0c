#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "rofanova/error.hpp"
#include "rofanova_cli/commands.hpp"

namespace {

using namespace rofanova;
using namespace rofanova::cli;

struct SharedFlags {
  std::string loss = "bisquare";
  std::string init = "pointwise-median";
  std::string layout = "wide";
  std::string delimiter = ",";
  bool no_header = false;
};

void add_loss_flags(CLI::App& cmd, SharedFlags& f, LossOptions& loss, IrlsConfig& irls) {
  cmd.add_option("--loss", f.loss, "median, huber, bisquare, hampel, optimal or least-squares")
      ->capture_default_str();
  cmd.add_option("--efficiency", loss.efficiency, "target Gaussian efficiency for calibration")
      ->capture_default_str();
  cmd.add_option("--tuning-a", loss.a, "explicit tuning constant a");
  cmd.add_option("--tuning-b", loss.b, "hampel constant b");
  cmd.add_option("--tuning-c", loss.c, "hampel constant c");
  cmd.add_option("--tol", irls.tolerance, "IRLS relative tolerance")->capture_default_str();
  cmd.add_option("--max-iter", irls.max_iterations, "IRLS iteration cap")->capture_default_str();
  cmd.add_option("--init", f.init, "pointwise-median or sample-mean")->capture_default_str();
}

void add_input_flags(CLI::App& cmd, SharedFlags& f, std::string& data) {
  cmd.add_option("data", data, "input CSV")->required();
  cmd.add_option("--layout", f.layout, "wide or long")->capture_default_str();
  cmd.add_option("--delimiter", f.delimiter, "field delimiter")->capture_default_str();
  cmd.add_flag("--no-header", f.no_header, "wide input without a header row");
}

void apply_shared(const SharedFlags& f, LossOptions& loss, IrlsConfig& irls, IngestSchema& schema) {
  loss.family = parse_loss_family(f.loss);
  irls.init = parse_init_kind(f.init);
  schema.layout = parse_layout(f.layout);
  if (f.delimiter.size() != 1) throw ConfigError("the delimiter must be a single character");
  schema.delimiter = f.delimiter.front();
  schema.header = !f.no_header;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust functional ANOVA with permutation tests"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  // test
  TestOptions test;
  SharedFlags test_flags;
  std::string design = "one-way";
  auto* test_cmd = app.add_subcommand("test", "permutation tests for main effects and interaction");
  add_input_flags(*test_cmd, test_flags, test.data_path);
  add_loss_flags(*test_cmd, test_flags, test.loss, test.irls);
  test_cmd->add_option("--design", design, "one-way or two-way")->capture_default_str();
  test_cmd->add_option("-B,--permutations", test.perm.permutations, "number of permutations")
      ->capture_default_str();
  test_cmd->add_option("--seed", test.perm.seed, "random seed")->capture_default_str();
  test_cmd->add_option("--alpha", test.perm.alpha, "significance level")->capture_default_str();
  test_cmd->add_flag("--add-one", test.perm.add_one, "report (1 + count) / (1 + B)");
  test_cmd->add_option("--threads", test.perm.threads, "worker threads, 0 for all cores")
      ->capture_default_str();
  test_cmd->add_flag("--residual-scale-cells", test.fit.residual_scale_for_cells,
                     "refit cell means with the residual scale");
  test_cmd->add_flag("--unit-scale", test.fit.unit_scale, "use sigma = 1 throughout");
  test_cmd->add_option("-o,--output", test.output_path, "report JSON")->capture_default_str();
  test_cmd->add_option("--means", test.means_path, "fitted means CSV");
  test_cmd->add_flag("--exit-on-reject", test.exit_on_reject, "exit with status 2 on rejection");

  // estimate
  EstimateOptions est;
  SharedFlags est_flags;
  auto* est_cmd = app.add_subcommand("estimate", "functional M-estimate of location");
  add_input_flags(*est_cmd, est_flags, est.data_path);
  add_loss_flags(*est_cmd, est_flags, est.loss, est.irls);
  est_cmd->add_flag("--unit-scale", est.unit_scale, "use sigma = 1 instead of FuNMAD");
  est_cmd->add_option("-o,--output", est.output_path, "location CSV")->capture_default_str();

  // simulate
  SimulateOptions sim;
  std::string config_path;
  std::string models, contaminations, sigmas, a_values, b_values, losses;
  bool no_timing = false;
  auto* sim_cmd = app.add_subcommand("simulate", "empirical size and power over a sweep");
  sim_cmd->add_option("--config", config_path, "sweep settings as key = value lines");
  sim_cmd->add_option("--scenario", sim.scenario, "1 (one-way) or 2 (two-way)");
  sim_cmd->add_option("--models", models, "comma list of M1, M2, M3");
  sim_cmd->add_option("--contaminations", contaminations, "comma list of C0..C6");
  sim_cmd->add_option("--sigma-indices", sigmas, "comma list of noise levels 1..7");
  sim_cmd->add_option("--effect-a", a_values, "comma list of row effect sizes");
  sim_cmd->add_option("--effect-b", b_values, "comma list of column effect sizes");
  sim_cmd->add_option("--losses", losses, "comma list of loss families");
  sim_cmd->add_option("--efficiency", sim.efficiency, "calibration efficiency");
  sim_cmd->add_option("-N,--replications", sim.replications, "replications per setting");
  sim_cmd->add_option("-B,--permutations", sim.permutations, "permutations per test");
  sim_cmd->add_option("--seed", sim.seed, "random seed");
  sim_cmd->add_option("--alpha", sim.alpha, "significance level");
  sim_cmd->add_option("--threads", sim.threads, "worker threads, 0 for all cores");
  sim_cmd->add_option("--units", sim.units_per_group, "units per group or cell");
  sim_cmd->add_option("--grid-points", sim.grid_points, "grid points on [0, 1]");
  sim_cmd->add_flag("--residual-scale-cells", sim.fit.residual_scale_for_cells,
                    "refit cell means with the residual scale");
  sim_cmd->add_flag("--no-timing", no_timing, "write 0 in the runtime column");
  sim_cmd->add_option("-o,--output", sim.output_path, "rates CSV");
  sim_cmd->add_option("--plot", sim.plot_path, "plot-ready CSV");

  // generate
  GenerateOptions gen;
  std::string gen_model = "M1", gen_contamination = "C0";
  auto* gen_cmd = app.add_subcommand("generate", "write a simulated data set");
  gen_cmd->add_option("--scenario", gen.scenario, "1 (one-way) or 2 (two-way)")->capture_default_str();
  gen_cmd->add_option("--model", gen_model, "scenario 1 model")->capture_default_str();
  gen_cmd->add_option("--contamination", gen_contamination, "contamination model")
      ->capture_default_str();
  gen_cmd->add_option("--sigma-index", gen.scenario1.sigma_index, "scenario 1 noise level");
  gen_cmd->add_option("--effect-a", gen.scenario2.a, "scenario 2 row effect size");
  gen_cmd->add_option("--effect-b", gen.scenario2.b, "scenario 2 column effect size");
  gen_cmd->add_option("--units", gen.scenario2.per_cell, "units per group or cell");
  gen_cmd->add_option("--seed", gen.seed, "random seed")->capture_default_str();
  gen_cmd->add_option("-o,--output", gen.output_path, "output CSV")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (test_cmd->parsed()) {
      apply_shared(test_flags, test.loss, test.irls, test.schema);
      test.schema.design = parse_design_kind(design);
      return cmd_test(test, std::cerr);
    }
    if (est_cmd->parsed()) {
      apply_shared(est_flags, est.loss, est.irls, est.schema);
      return cmd_estimate(est, std::cerr);
    }
    if (sim_cmd->parsed()) {
      SimulateOptions base;
      if (!config_path.empty()) {
        base = simulate_options_from_config(parse_config_text(read_text(config_path)), base);
      }
      // Flags given on the command line override the config file.
      std::map<std::string, std::string> overrides;
      const auto flag = [&](const char* name, const std::string& key, const std::string& value) {
        if (sim_cmd->count(name) > 0) overrides[key] = value;
      };
      flag("--scenario", "scenario", std::to_string(sim.scenario));
      flag("--models", "models", models);
      flag("--contaminations", "contaminations", contaminations);
      flag("--sigma-indices", "sigma_indices", sigmas);
      flag("--effect-a", "a", a_values);
      flag("--effect-b", "b", b_values);
      flag("--losses", "losses", losses);
      flag("--efficiency", "efficiency", format_exact(sim.efficiency));
      flag("--replications", "replications", std::to_string(sim.replications));
      flag("--permutations", "permutations", std::to_string(sim.permutations));
      flag("--seed", "seed", std::to_string(sim.seed));
      flag("--alpha", "alpha", format_exact(sim.alpha));
      flag("--threads", "threads", std::to_string(sim.threads));
      flag("--units", "units", std::to_string(sim.units_per_group));
      flag("--grid-points", "grid_points", std::to_string(sim.grid_points));
      SimulateOptions resolved = simulate_options_from_config(overrides, base);
      if (sim.fit.residual_scale_for_cells) resolved.fit.residual_scale_for_cells = true;
      if (no_timing) resolved.timing = false;
      if (sim_cmd->count("--output") > 0) resolved.output_path = sim.output_path;
      if (sim_cmd->count("--plot") > 0) resolved.plot_path = sim.plot_path;
      return cmd_simulate(resolved, std::cerr);
    }
    if (gen_cmd->parsed()) {
      gen.scenario1.model = parse_model(gen_model);
      gen.scenario1.contamination = parse_contamination(gen_contamination);
      gen.scenario2.contamination = gen.scenario1.contamination;
      gen.scenario1.per_group = gen.scenario2.per_cell;
      return cmd_generate(gen, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
