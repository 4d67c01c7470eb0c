#include "rofanova_cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "rofanova/parallel.hpp"

#ifndef ROFANOVA_VERSION
#define ROFANOVA_VERSION "0.0.0"
#endif

namespace rofanova::cli {

using Json = nlohmann::ordered_json;

std::string version() { return ROFANOVA_VERSION; }

LossSpec LossOptions::make() const {
  if ((b || c) && family != LossFamily::hampel) {
    throw ConfigError("constants b and c apply to the hampel loss only");
  }
  if (!a) {
    if (b || c) throw ConfigError("hampel constants b and c need a as well");
    return LossSpec::calibrated(family, efficiency);
  }
  switch (family) {
    case LossFamily::huber:
      return LossSpec::huber(*a);
    case LossFamily::bisquare:
      return LossSpec::bisquare(*a);
    case LossFamily::hampel:
      // Missing b, c follow the 2:4:8 shape.
      return LossSpec::hampel(*a, b.value_or(2.0 * *a), c.value_or(4.0 * *a));
    case LossFamily::optimal:
      return LossSpec::optimal(*a);
    case LossFamily::median:
    case LossFamily::least_squares:
      break;
  }
  throw ConfigError("the " + std::string(to_string(family)) + " loss takes no tuning constants");
}

InitKind parse_init_kind(const std::string& name) {
  if (name == "pointwise-median" || name == "median") return InitKind::pointwise_median;
  if (name == "sample-mean" || name == "mean") return InitKind::sample_mean;
  throw ConfigError("unknown initializer '" + name + "' (expected pointwise-median or sample-mean)");
}

std::string to_string(InitKind kind) {
  switch (kind) {
    case InitKind::pointwise_median:
      return "pointwise-median";
    case InitKind::sample_mean:
      return "sample-mean";
    case InitKind::user:
      return "user";
  }
  return "unknown";
}

std::string sibling_path(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path);
  p.replace_extension();
  return p.string() + suffix;
}

std::string manifest_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    char* end = nullptr;
    const long long v = std::strtoll(epoch, &end, 10);
    if (end != epoch && *end == '\0') now = static_cast<std::time_t>(v);
  }
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

std::ofstream open_output(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  return out;
}

void write_json(const std::string& path, const Json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

Json loss_json(const LossSpec& loss, const LossOptions& opts) {
  Json j;
  j["family"] = std::string(to_string(loss.family()));
  switch (loss.family()) {
    case LossFamily::hampel:
      j["a"] = loss.a();
      j["b"] = loss.b();
      j["c"] = loss.c();
      break;
    case LossFamily::huber:
    case LossFamily::bisquare:
    case LossFamily::optimal:
      j["a"] = loss.a();
      break;
    default:
      break;
  }
  j["calibrated"] = !opts.a.has_value();
  if (!opts.a) j["efficiency"] = opts.efficiency;
  return j;
}

Json irls_json(const IrlsConfig& cfg) {
  return Json{{"tolerance", cfg.tolerance},
              {"max_iterations", cfg.max_iterations},
              {"init", to_string(cfg.init)},
              {"scale_floor", cfg.scale_floor}};
}

Json schema_json(const IngestSchema& s) {
  return Json{{"layout", std::string(to_string(s.layout))},
              {"delimiter", std::string(1, s.delimiter)},
              {"header", s.header}};
}

void write_manifest(const std::string& output_path, const std::string& command, Json configuration,
                    unsigned threads, const std::vector<std::string>& outputs) {
  Json m;
  m["command"] = command;
  m["version"] = version();
  m["timestamp"] = manifest_timestamp();
  m["threads"] = resolve_threads(threads);
  m["configuration"] = std::move(configuration);
  m["outputs"] = outputs;
  write_json(sibling_path(output_path, ".manifest.json"), m);
}


std::string coordinate_header(const DomainGrid& grid) {
  return grid.dim() == 1 ? "t" : "x,y";
}

std::string coordinate_text(const DomainGrid& grid, std::size_t k) {
  if (grid.dim() == 1) return format_result(grid.coordinate(0, k));
  const std::size_t ny = grid.points(1);
  return format_result(grid.coordinate(0, k / ny)) + "," + format_result(grid.coordinate(1, k % ny));
}

Json dataset_json(const Dataset& data, const DesignSpec* design) {
  Json j;
  j["units"] = data.sample.size();
  j["grid_dim"] = data.sample.grid().dim();
  j["grid_points"] = data.sample.grid_size();
  if (design) {
    j["design"] = std::string(to_string(design->kind));
    j["levels_a"] = data.levels_a;
    if (design->kind == DesignKind::two_way) j["levels_b"] = data.levels_b;
    j["cell_counts"] = design->counts;
  }
  return j;
}

const std::string& level_name(const std::vector<std::string>& names, std::size_t i) {
  static const std::string empty;
  return i < names.size() ? names[i] : empty;
}

void write_means(const std::string& path, const Dataset& data, const DesignSpec& design,
                 const RobustFit& fit) {
  auto out = open_output(path);
  const DomainGrid& grid = data.sample.grid();
  out << "component,level_a,level_b," << coordinate_header(grid) << ",mean,scale\n";
  const auto emit = [&](const char* component, const std::string& la, const std::string& lb,
                        const RobustLocation& loc, const ScaleFunction& scale) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      out << component << ',' << la << ',' << lb << ',' << coordinate_text(grid, k) << ','
          << format_result(loc.location[k]) << ',' << format_result(scale[k]) << '\n';
    }
  };
  emit("grand", "", "", fit.grand, fit.grand_scale);
  for (std::size_t i = 0; i < fit.rows.size(); ++i) {
    emit("row", level_name(data.levels_a, i), "", fit.rows[i], fit.row_scales[i]);
  }
  for (std::size_t j = 0; j < fit.cols.size(); ++j) {
    emit("col", "", level_name(data.levels_b, j), fit.cols[j], fit.col_scales[j]);
  }
  if (design.kind == DesignKind::two_way) {
    for (std::size_t i = 0; i < design.levels_a; ++i) {
      for (std::size_t j = 0; j < design.levels_b; ++j) {
        const std::size_t c = design.cell_index(i, j);
        emit("cell", level_name(data.levels_a, i), level_name(data.levels_b, j), fit.cells[c],
             fit.cell_scales[c]);
      }
    }
  }
}

double median_of(std::vector<double> v) {
  return median_inplace(v);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    if (first != std::string::npos) out.push_back(item.substr(first, last - first + 1));
  }
  if (out.empty()) throw ConfigError("empty list '" + text + "'");
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) {
    throw ConfigError("'" + key + "' expects a number, got '" + text + "'");
  }
  return v;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty() || text.front() == '-') {
    throw ConfigError("'" + key + "' expects a nonnegative integer, got '" + text + "'");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + text + "'");
}

}  // namespace

// ---------------------------------------------------------------------------
// test

int cmd_test(const TestOptions& opts, std::ostream& log) {
  IngestSchema schema = opts.schema;
  schema.require_labels = true;
  const Dataset data = read_dataset_file(opts.data_path, schema);
  const DesignSpec design = DesignSpec::from_sample(data.sample, schema.design);
  const LossSpec loss = opts.loss.make();
  const FanovaReport report = run_test(data.sample, design, loss, opts.irls, opts.perm, opts.fit);

  Json config;
  config["data"] = opts.data_path;
  config["input"] = schema_json(schema);
  config["loss"] = loss_json(loss, opts.loss);
  config["irls"] = irls_json(opts.irls);
  config["permutations"] = opts.perm.permutations;
  config["seed"] = opts.perm.seed;
  config["alpha"] = opts.perm.alpha;
  config["p_value_rule"] = opts.perm.add_one ? "(1+count)/(1+B)" : "count/B";
  config["residual_scale_for_cells"] = opts.fit.residual_scale_for_cells;
  config["unit_scale"] = opts.fit.unit_scale || loss.family() == LossFamily::least_squares;

  Json j;
  j["tool"] = "rofanova";
  j["version"] = version();
  j["command"] = "test";
  j["configuration"] = config;
  j["data"] = dataset_json(data, &design);
  Json results = Json::array();
  for (const HypothesisResult& r : report.results) {
    results.push_back(Json{{"hypothesis", std::string(to_string(r.hypothesis))},
                           {"statistic", r.observed},
                           {"p_value", r.p_value},
                           {"exceedances", r.exceedances},
                           {"reject", r.reject}});
  }
  j["results"] = results;
  j["diagnostics"] = Json{{"nonconverged_fits", report.nonconverged_fits},
                          {"degenerate_fits", report.degenerate_fits},
                          {"substituted_cell_scales", report.substituted_cell_scales}};
  write_json(opts.output_path, j);

  const std::string means_path =
      opts.means_path.empty() ? sibling_path(opts.output_path, ".means.csv") : opts.means_path;
  const RobustFit fit = fit_robust(data.sample, design, loss, opts.irls, opts.fit);
  write_means(means_path, data, design, fit);
  write_manifest(opts.output_path, "test", config, opts.perm.threads, {opts.output_path, means_path});

  for (const HypothesisResult& r : report.results) {
    log << "H0," << to_string(r.hypothesis) << ": F = " << format_result(r.observed)
        << ", p = " << format_result(r.p_value) << (r.reject ? " (rejected)" : "") << '\n';
  }
  if (report.nonconverged_fits > 0) {
    log << "warning: " << report.nonconverged_fits << " IRLS fits hit the iteration cap\n";
  }
  return opts.exit_on_reject && report.any_rejected() ? kExitRejected : kExitOk;
}

// ---------------------------------------------------------------------------
// estimate

int cmd_estimate(const EstimateOptions& opts, std::ostream& log) {
  IngestSchema schema = opts.schema;
  schema.require_labels = false;
  const Dataset data = read_dataset_file(opts.data_path, schema);
  const FunctionalSample& sample = data.sample;
  const LossSpec loss = opts.loss.make();
  const ScaleFunction sigma = funmad(sample, opts.irls);
  const ScaleFunction used = opts.unit_scale ? ScaleFunction::unit(sample.grid()) : sigma;
  const RobustLocation loc = m_estimate(sample, loss, used, opts.irls);

  {
    auto out = open_output(opts.output_path);
    out << coordinate_header(sample.grid()) << ",mu,sigma\n";
    for (std::size_t k = 0; k < sample.grid_size(); ++k) {
      out << coordinate_text(sample.grid(), k) << ',' << format_result(loc.location[k]) << ','
          << format_result(sigma[k]) << '\n';
    }
  }

  Json config;
  config["data"] = opts.data_path;
  config["input"] = schema_json(schema);
  config["loss"] = loss_json(loss, opts.loss);
  config["irls"] = irls_json(opts.irls);
  config["unit_scale"] = opts.unit_scale;

  Json weights = Json::object();
  for (std::size_t u = 0; u < sample.size(); ++u) weights[data.unit_ids[u]] = loc.weights[u];
  Json j;
  j["tool"] = "rofanova";
  j["version"] = version();
  j["command"] = "estimate";
  j["configuration"] = config;
  j["data"] = dataset_json(data, nullptr);
  j["iterations"] = loc.iterations;
  j["objective"] = loc.objective;
  j["converged"] = loc.converged;
  j["degenerate"] = loc.degenerate;
  j["weights"] = weights;
  const std::string sidecar = sibling_path(opts.output_path, ".json");
  write_json(sidecar, j);
  write_manifest(opts.output_path, "estimate", config, 1, {opts.output_path, sidecar});

  log << "location after " << loc.iterations << " iterations, J = " << format_result(loc.objective)
      << (loc.converged ? "" : " (iteration cap reached)") << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate

void SimulateOptions::validate() const {
  if (scenario != 1 && scenario != 2) throw ConfigError("scenario must be 1 or 2");
  if (replications < 1) throw ConfigError("at least one replication is required");
  if (permutations < 1) throw ConfigError("at least one permutation is required");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (losses.empty() || contaminations.empty()) throw ConfigError("empty loss or contamination list");
  if (scenario == 1) {
    if (models.empty() || sigma_indices.empty()) throw ConfigError("empty model or sigma list");
    for (int s : sigma_indices) scenario1_sigma(s);
  } else {
    if (a_values.empty() || b_values.empty()) throw ConfigError("empty a or b list");
    for (double v : a_values) {
      if (!std::isfinite(v)) throw ConfigError("a values must be finite");
    }
    for (double v : b_values) {
      if (!std::isfinite(v)) throw ConfigError("b values must be finite");
    }
  }
  irls.validate();
}

SimulateOptions simulate_options_from_config(const std::map<std::string, std::string>& entries,
                                             SimulateOptions o) {
  for (const auto& [key, value] : entries) {
    if (key == "scenario") {
      o.scenario = static_cast<int>(to_unsigned(key, value));
    } else if (key == "models" || key == "model") {
      o.models.clear();
      for (const auto& s : split_list(value)) o.models.push_back(parse_model(s));
    } else if (key == "contaminations" || key == "contamination") {
      o.contaminations.clear();
      for (const auto& s : split_list(value)) o.contaminations.push_back(parse_contamination(s));
    } else if (key == "sigma_indices" || key == "sigma_index") {
      o.sigma_indices.clear();
      for (const auto& s : split_list(value)) o.sigma_indices.push_back(static_cast<int>(to_unsigned(key, s)));
    } else if (key == "a") {
      o.a_values.clear();
      for (const auto& s : split_list(value)) o.a_values.push_back(to_double(key, s));
    } else if (key == "b") {
      o.b_values.clear();
      for (const auto& s : split_list(value)) o.b_values.push_back(to_double(key, s));
    } else if (key == "losses" || key == "loss") {
      o.losses.clear();
      for (const auto& s : split_list(value)) o.losses.push_back(parse_loss_family(s));
    } else if (key == "efficiency") {
      o.efficiency = to_double(key, value);
    } else if (key == "replications") {
      o.replications = to_unsigned(key, value);
    } else if (key == "permutations") {
      o.permutations = to_unsigned(key, value);
    } else if (key == "seed") {
      o.seed = to_unsigned(key, value);
    } else if (key == "alpha") {
      o.alpha = to_double(key, value);
    } else if (key == "threads") {
      o.threads = static_cast<unsigned>(to_unsigned(key, value));
    } else if (key == "units" || key == "per_group" || key == "per_cell") {
      o.units_per_group = to_unsigned(key, value);
    } else if (key == "grid_points") {
      o.grid_points = to_unsigned(key, value);
    } else if (key == "magnitude") {
      o.magnitude = to_double(key, value);
    } else if (key == "probability") {
      o.probability = to_double(key, value);
    } else if (key == "sigma") {
      o.scenario2_sigma = to_double(key, value);
    } else if (key == "timing") {
      o.timing = to_bool(key, value);
    } else if (key == "residual_scale_for_cells") {
      o.fit.residual_scale_for_cells = to_bool(key, value);
    } else {
      throw ConfigError("unknown simulation setting '" + key + "'");
    }
  }
  return o;
}

namespace {

struct RateRow {
  LossFamily loss;
  Model model = Model::M1;
  Contamination contamination = Contamination::C0;
  int sigma_index = 0;
  double a = 0.0;
  double b = 0.0;
  RateSummary summary;
};

void write_plot_scenario1(std::ostream& out, const std::vector<RateRow>& rows) {
  for (const RateRow& r : rows) {
    const RateEstimate& e = r.summary.rate(Hypothesis::A);
    out << to_string(r.model) << ',' << to_string(r.contamination) << ',' << to_string(r.loss)
        << ",,sigma_index," << r.sigma_index << ",A," << format_result(e.rate) << '\n';
  }
}

// Scenario 2 panels summarize equivalent settings by their median: H_A over
// b for each a, H_B over a for each b, H_AB over the a < 0.25 settings.
void write_plot_scenario2(std::ostream& out, const std::vector<RateRow>& rows,
                          const SimulateOptions& o) {
  for (Contamination c : o.contaminations) {
    for (LossFamily loss : o.losses) {
      const auto rate = [&](double a, double b, Hypothesis h) {
        for (const RateRow& r : rows) {
          if (r.contamination == c && r.loss == loss && r.a == a && r.b == b) {
            return r.summary.rate(h).rate;
          }
        }
        throw ConfigError("missing simulation cell");
      };
      const std::string prefix = std::string(to_string(c)) + ',' + std::string(to_string(loss));
      for (double a : o.a_values) {
        std::vector<double> v;
        for (double b : o.b_values) v.push_back(rate(a, b, Hypothesis::A));
        out << "H_A," << prefix << ",median over b,a," << format_result(a) << ",A,"
            << format_result(median_of(v)) << '\n';
      }
      for (double b : o.b_values) {
        std::vector<double> v;
        for (double a : o.a_values) v.push_back(rate(a, b, Hypothesis::B));
        out << "H_B," << prefix << ",median over a,b," << format_result(b) << ",B,"
            << format_result(median_of(v)) << '\n';
      }
      for (double b : o.b_values) {
        std::vector<double> small;
        for (double a : o.a_values) {
          if (a < 0.25) {
            small.push_back(rate(a, b, Hypothesis::AB));
          } else {
            out << "H_AB," << prefix << ",a=" << format_result(a) << ",b," << format_result(b)
                << ",AB," << format_result(rate(a, b, Hypothesis::AB)) << '\n';
          }
        }
        if (!small.empty()) {
          out << "H_AB," << prefix << ",a<0.25 median,b," << format_result(b) << ",AB,"
              << format_result(median_of(small)) << '\n';
        }
      }
    }
  }
}

}  // namespace

int cmd_simulate(const SimulateOptions& o, std::ostream& log) {
  o.validate();
  PermutationConfig perm;
  perm.permutations = o.permutations;
  perm.alpha = o.alpha;
  perm.threads = o.threads;

  // Every setting replays the same replication streams (common random
  // numbers), so rates along any sweep axis are paired comparisons.
  perm.seed = o.seed;
  std::vector<RateRow> rows;
  const auto run = [&](const SampleGenerator& gen, DesignKind kind, RateRow proto) {
    for (LossFamily family : o.losses) {
      RateRow row = proto;
      row.loss = family;
      row.summary = empirical_rates(gen, kind, LossSpec::calibrated(family, o.efficiency), o.irls,
                                    perm, o.replications, o.fit);
      log << to_string(family) << ' ' << to_string(row.contamination);
      if (o.scenario == 1) {
        log << ' ' << to_string(row.model) << " sigma_" << row.sigma_index;
      } else {
        log << " a=" << format_result(row.a) << " b=" << format_result(row.b);
      }
      for (const RateEstimate& e : row.summary.rates) {
        log << "  " << to_string(e.hypothesis) << '=' << format_result(e.rate);
      }
      log << '\n';
      rows.push_back(std::move(row));
    }
  };

  if (o.scenario == 1) {
    for (Model model : o.models) {
      for (Contamination c : o.contaminations) {
        for (int s : o.sigma_indices) {
          Scenario1Spec spec;
          spec.model = model;
          spec.contamination = c;
          spec.sigma_index = s;
          spec.per_group = o.units_per_group;
          spec.grid_points = o.grid_points;
          spec.magnitude = o.magnitude;
          spec.probability = o.probability;
          const Scenario1Generator gen(spec);
          RateRow proto{LossFamily::bisquare, model, c, s, 0.0, 0.0, {}};
          run([&gen](Rng& rng) { return gen(rng); }, DesignKind::one_way, proto);
        }
      }
    }
  } else {
    for (Contamination c : o.contaminations) {
      for (double a : o.a_values) {
        for (double b : o.b_values) {
          Scenario2Spec spec;
          spec.a = a;
          spec.b = b;
          spec.contamination = c;
          spec.per_cell = o.units_per_group;
          spec.grid_points = o.grid_points;
          spec.sigma = o.scenario2_sigma;
          spec.magnitude = o.magnitude;
          spec.probability = o.probability;
          const Scenario2Generator gen(spec);
          RateRow proto{LossFamily::bisquare, Model::M1, c, 0, a, b, {}};
          run([&gen](Rng& rng) { return gen(rng); }, DesignKind::two_way, proto);
        }
      }
    }
  }

  {
    auto out = open_output(o.output_path);
    out << "scenario,loss,model,contamination,sigma_index,sigma,a,b,hypothesis,rate,std_error,"
           "rejections,replications,mean_seconds\n";
    for (const RateRow& r : rows) {
      for (const RateEstimate& e : r.summary.rates) {
        out << o.scenario << ',' << to_string(r.loss) << ',';
        if (o.scenario == 1) {
          out << to_string(r.model) << ',' << to_string(r.contamination) << ',' << r.sigma_index
              << ',' << format_result(scenario1_sigma(r.sigma_index)) << ",,,";
        } else {
          out << ',' << to_string(r.contamination) << ",," << format_result(o.scenario2_sigma) << ','
              << format_result(r.a) << ',' << format_result(r.b) << ',';
        }
        out << to_string(e.hypothesis) << ',' << format_result(e.rate) << ','
            << format_result(e.std_error) << ',' << e.rejections << ',' << e.replications << ','
            << format_result(o.timing ? r.summary.mean_seconds : 0.0) << '\n';
      }
    }
  }

  const std::string plot_path =
      o.plot_path.empty() ? sibling_path(o.output_path, ".plot.csv") : o.plot_path;
  {
    auto out = open_output(plot_path);
    out << "figure,panel,series,curve,x_name,x,hypothesis,rate\n";
    if (o.scenario == 1) {
      write_plot_scenario1(out, rows);
    } else {
      write_plot_scenario2(out, rows, o);
    }
  }

  Json config;
  config["scenario"] = o.scenario;
  Json losses = Json::array();
  for (LossFamily f : o.losses) losses.push_back(std::string(to_string(f)));
  config["losses"] = losses;
  Json contaminations = Json::array();
  for (Contamination c : o.contaminations) contaminations.push_back(to_string(c));
  config["contaminations"] = contaminations;
  if (o.scenario == 1) {
    Json models = Json::array();
    for (Model m : o.models) models.push_back(to_string(m));
    config["models"] = models;
    config["sigma_indices"] = o.sigma_indices;
  } else {
    config["a"] = o.a_values;
    config["b"] = o.b_values;
    config["sigma"] = o.scenario2_sigma;
  }
  config["efficiency"] = o.efficiency;
  config["replications"] = o.replications;
  config["permutations"] = o.permutations;
  config["seed"] = o.seed;
  config["alpha"] = o.alpha;
  config["units_per_group"] = o.units_per_group;
  config["grid_points"] = o.grid_points;
  config["magnitude"] = o.magnitude;
  config["probability"] = o.probability;
  config["irls"] = irls_json(o.irls);
  config["residual_scale_for_cells"] = o.fit.residual_scale_for_cells;
  config["timing"] = o.timing;
  write_manifest(o.output_path, "simulate", config, o.threads, {o.output_path, plot_path});
  return kExitOk;
}

// ---------------------------------------------------------------------------
// generate

int cmd_generate(const GenerateOptions& o, std::ostream& log) {
  Rng rng = make_stream(o.seed, 0);
  FunctionalSample sample = o.scenario == 1 ? generate_scenario1(o.scenario1, rng)
                            : o.scenario == 2
                                ? generate_scenario2(o.scenario2, rng)
                                : throw ConfigError("scenario must be 1 or 2");
  Dataset data{sample, {}, {}, {}};
  for (std::size_t u = 0; u < sample.size(); ++u) data.unit_ids.push_back(std::to_string(u + 1));
  for (std::size_t i = 0; i < sample.levels_a(); ++i) data.levels_a.push_back(std::to_string(i + 1));
  if (o.scenario == 2) {
    for (std::size_t j = 0; j < sample.levels_b(); ++j) data.levels_b.push_back(std::to_string(j + 1));
  }
  {
    auto out = open_output(o.output_path);
    write_wide(out, data);
  }
  Json config;
  config["scenario"] = o.scenario;
  config["spec"] = o.scenario == 1 ? to_config_text(o.scenario1) : to_config_text(o.scenario2);
  config["seed"] = o.seed;
  write_manifest(o.output_path, "generate", config, 1, {o.output_path});
  log << "wrote " << sample.size() << " curves to " << o.output_path << '\n';
  return kExitOk;
}

}  // namespace rofanova::cli
