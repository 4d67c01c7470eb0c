#include "rofanova/simgen.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "rofanova/error.hpp"

namespace rofanova {

namespace {

constexpr double kRateUnit = 1e-5;
constexpr double kPartialUpper = 0.75;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
  // Shortest text that round-trips.
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double to_double(const std::map<std::string, std::string>& entries, const std::string& key,
                 double fallback) {
  const auto it = entries.find(key);
  if (it == entries.end()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' is not a number: " + it->second);
  }
}

std::size_t to_count(const std::map<std::string, std::string>& entries, const std::string& key,
                     std::size_t fallback) {
  const double v = to_double(entries, key, static_cast<double>(fallback));
  if (!(v >= 1.0) || v != std::floor(v)) {
    throw ConfigError("config key '" + key + "' must be a positive integer");
  }
  return static_cast<std::size_t>(v);
}

void check_contamination_params(double magnitude, double probability) {
  if (!std::isfinite(magnitude)) throw ConfigError("contamination size must be finite");
  if (!(probability >= 0.0 && probability <= 1.0)) {
    throw ConfigError("contamination probability must lie in [0, 1]");
  }
}

// Per-curve contamination draws, made for every contamination model so the
// error streams line up across models.
struct ContaminationDraw {
  bool active = false;
  double sign = 1.0;
  double onset = 0.0;
};

ContaminationDraw draw_contamination(double probability, Rng& rng) {
  ContaminationDraw d;
  d.active = std::bernoulli_distribution(probability)(rng);
  d.sign = std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
  d.onset = std::uniform_real_distribution<double>(0.0, kPartialUpper)(rng);
  return d;
}

// Additive magnitude contamination C_i(t) for C0-C4.
double magnitude_shift(Contamination c, const ContaminationDraw& d, int level, double magnitude,
                       double t) {
  if (!d.active) return 0.0;
  const double level_sign = level % 2 == 0 ? 1.0 : -1.0;
  switch (c) {
    case Contamination::C1:
      return d.sign * magnitude;
    case Contamination::C2:
      return t >= d.onset ? d.sign * magnitude : 0.0;
    case Contamination::C3:
      return level_sign * magnitude;
    case Contamination::C4:
      return t >= d.onset ? level_sign * magnitude : 0.0;
    default:
      return 0.0;
  }
}

bool shape_contamination(Contamination c) {
  return c == Contamination::C5 || c == Contamination::C6;
}

std::vector<GaussianProcess> shape_processes(Contamination c, std::size_t levels, double sigma,
                                             const DomainGrid& grid) {
  std::vector<GaussianProcess> out;
  if (!shape_contamination(c)) return out;
  for (std::size_t i = 1; i <= levels; ++i) {
    const double k = c == Contamination::C5 ? 1e2 : std::pow(10.0, 2.0 + static_cast<double>(i));
    out.emplace_back(GpSpec{sigma, k, grid});
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Gaussian processes

void GpSpec::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("GP sigma must be positive");
  if (!(rate_scale > 0.0) || !std::isfinite(rate_scale)) {
    throw ConfigError("GP rate scale must be positive");
  }
  if (grid.dim() != 1) throw ConfigError("GP sampling supports 1D grids");
}

double gp_covariance(const GpSpec& spec, double s, double t) {
  return spec.sigma * spec.sigma * std::exp(-std::abs(s - t) * spec.rate_scale * kRateUnit);
}

std::vector<double> cholesky_with_jitter(std::span<const double> matrix, std::size_t n,
                                         double* jitter_used) {
  if (matrix.size() != n * n) throw ShapeError("covariance matrix must be n x n");
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      cov(matrix.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const double scale = cov.diagonal().cwiseAbs().maxCoeff();

  const double jitters[] = {0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8};
  for (double jitter : jitters) {
    Eigen::MatrixXd work = cov;
    work.diagonal().array() += jitter * scale;
    const Eigen::LLT<Eigen::MatrixXd> llt(work);
    if (llt.info() != Eigen::Success) continue;
    const Eigen::MatrixXd lower = llt.matrixL();
    if (!lower.allFinite()) continue;
    if (jitter_used != nullptr) *jitter_used = jitter;
    std::vector<double> out(n * n);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        out[r * n + c] = lower(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      }
    }
    return out;
  }
  throw NumericError("covariance factorization failed even with maximal jitter");
}

GaussianProcess::GaussianProcess(const GpSpec& spec) : spec_(spec) {
  spec_.validate();
  const std::size_t n = spec_.grid.size();
  const std::vector<double> t = spec_.grid.coordinates(0);
  std::vector<double> cov(n * n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) cov[r * n + c] = gp_covariance(spec_, t[r], t[c]);
  }
  factor_ = cholesky_with_jitter(cov, n, &jitter_);
}

void GaussianProcess::draw_into(Rng& rng, std::span<double> out) const {
  const std::size_t n = spec_.grid.size();
  if (out.size() != n) throw ShapeError("GP draw buffer has the wrong size");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> z(n);
  for (double& v : z) v = normal(rng);
  for (std::size_t r = 0; r < n; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c <= r; ++c) acc += factor_[r * n + c] * z[c];
    out[r] = acc;
  }
}

GridFunction GaussianProcess::draw(Rng& rng) const {
  std::vector<double> v(spec_.grid.size());
  draw_into(rng, v);
  return GridFunction(spec_.grid, std::move(v));
}

std::vector<GridFunction> gp_sample(const GpSpec& spec, std::size_t count, Rng& rng) {
  const GaussianProcess gp(spec);
  std::vector<GridFunction> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(gp.draw(rng));
  return out;
}

// ---------------------------------------------------------------------------
// Names

std::string to_string(Model model) {
  switch (model) {
    case Model::M1:
      return "M1";
    case Model::M2:
      return "M2";
    case Model::M3:
      return "M3";
  }
  return "?";
}

std::string to_string(Contamination c) { return "C" + std::to_string(static_cast<int>(c)); }

Model parse_model(const std::string& name) {
  const std::string s = trim(name);
  if (s == "M1" || s == "m1" || s == "1") return Model::M1;
  if (s == "M2" || s == "m2" || s == "2") return Model::M2;
  if (s == "M3" || s == "m3" || s == "3") return Model::M3;
  throw ConfigError("unknown model '" + name + "'");
}

Contamination parse_contamination(const std::string& name) {
  std::string s = trim(name);
  if (!s.empty() && (s[0] == 'C' || s[0] == 'c')) s = s.substr(1);
  if (s.size() == 1 && s[0] >= '0' && s[0] <= '6') return static_cast<Contamination>(s[0] - '0');
  throw ConfigError("unknown contamination model '" + name + "'");
}

// ---------------------------------------------------------------------------
// Scenario 1

double scenario1_sigma(int index) {
  if (index < 1 || index > 6) throw ConfigError("sigma index must lie in 1..6");
  return (1.0 + 0.8 * (index - 1)) / 25.0;
}

double scenario1_effect(Model model, int level, double t) {
  const double i = level;
  switch (model) {
    case Model::M1:
      return t * (1.0 - t);
    case Model::M2:
      return std::pow(t, i) * std::pow(1.0 - t, 6.0 - i);
    case Model::M3:
      return std::pow(t, i / 5.0) * std::pow(1.0 - t, 6.0 - i / 5.0);
  }
  return 0.0;
}

void Scenario1Spec::validate() const {
  scenario1_sigma(sigma_index);
  if (per_group < 1 || groups < 2 || grid_points < 1) {
    throw ConfigError("scenario 1 needs >= 2 groups, >= 1 curve per group and >= 1 grid point");
  }
  check_contamination_params(magnitude, probability);
}

Scenario1Generator::Scenario1Generator(const Scenario1Spec& spec)
    : spec_((spec.validate(), spec)),
      grid_(DomainGrid::line(spec.grid_points)),
      base_(GpSpec{spec.sigma(), 1.0, grid_}),
      shape_(shape_processes(spec.contamination, spec.groups, spec.sigma(), grid_)) {}

FunctionalSample Scenario1Generator::operator()(Rng& rng) const {
  const std::size_t m = grid_.size();
  const std::size_t n = spec_.groups * spec_.per_group;
  const std::vector<double> t = grid_.coordinates(0);
  std::vector<double> values(n * m);
  std::vector<Label> labels;
  labels.reserve(n);
  std::vector<double> noise(m);

  std::size_t unit = 0;
  for (std::size_t g = 0; g < spec_.groups; ++g) {
    const int level = static_cast<int>(g) + 1;
    for (std::size_t k = 0; k < spec_.per_group; ++k, ++unit) {
      const ContaminationDraw d = draw_contamination(spec_.probability, rng);
      const bool reshaped = shape_contamination(spec_.contamination) && d.active;
      (reshaped ? shape_[g] : base_).draw_into(rng, noise);
      for (std::size_t p = 0; p < m; ++p) {
        values[unit * m + p] =
            scenario1_effect(spec_.model, level, t[p]) +
            magnitude_shift(spec_.contamination, d, level, spec_.magnitude, t[p]) + noise[p];
      }
      labels.push_back({g, 0});
    }
  }
  return FunctionalSample(grid_, n, std::move(values), std::move(labels), spec_.groups, 1);
}

FunctionalSample generate_scenario1(const Scenario1Spec& spec, Rng& rng) {
  return Scenario1Generator(spec)(rng);
}

// ---------------------------------------------------------------------------
// Scenario 2

double Scenario2Effects::grand(double t) const { return t * (1.0 - t); }

double Scenario2Effects::row(int i, double t) const {
  const double sign = i % 2 == 0 ? 1.0 : -1.0;
  return a * sign * std::abs(std::sin(4.0 * std::numbers::pi * t));
}

double Scenario2Effects::col(int j, double t) const {
  const double sign = j % 2 == 0 ? 1.0 : -1.0;
  return t > 0.5 ? b * sign : 0.0;
}

double Scenario2Effects::interaction(int i, int j, double t) const {
  if (!(a >= 0.25)) return 0.0;
  return -row(i, t) * col(j, t);
}

double Scenario2Effects::mean(int i, int j, double t) const {
  return grand(t) + row(i, t) + col(j, t) + interaction(i, j, t);
}

void Scenario2Spec::validate() const {
  if (!std::isfinite(a) || !std::isfinite(b)) throw ConfigError("a and b must be finite");
  if (!(sigma > 0.0)) throw ConfigError("scenario 2 sigma must be positive");
  if (per_cell < 1 || grid_points < 1) throw ConfigError("scenario 2 needs nonempty cells");
  check_contamination_params(magnitude, probability);
}

Scenario2Generator::Scenario2Generator(const Scenario2Spec& spec)
    : spec_((spec.validate(), spec)),
      grid_(DomainGrid::line(spec.grid_points)),
      base_(GpSpec{spec.sigma, 1.0, grid_}),
      shape_(shape_processes(spec.contamination, 2, spec.sigma, grid_)) {}

FunctionalSample Scenario2Generator::operator()(Rng& rng) const {
  constexpr std::size_t kLevels = 2;
  const std::size_t m = grid_.size();
  const std::size_t n = kLevels * kLevels * spec_.per_cell;
  const std::vector<double> t = grid_.coordinates(0);
  const Scenario2Effects effects{spec_.a, spec_.b};
  std::vector<double> values(n * m);
  std::vector<Label> labels;
  labels.reserve(n);
  std::vector<double> noise(m);

  std::size_t unit = 0;
  for (std::size_t ia = 0; ia < kLevels; ++ia) {
    for (std::size_t jb = 0; jb < kLevels; ++jb) {
      const int i = static_cast<int>(ia) + 1;
      const int j = static_cast<int>(jb) + 1;
      for (std::size_t k = 0; k < spec_.per_cell; ++k, ++unit) {
        const ContaminationDraw d = draw_contamination(spec_.probability, rng);
        const bool reshaped = shape_contamination(spec_.contamination) && d.active;
        (reshaped ? shape_[ia] : base_).draw_into(rng, noise);
        for (std::size_t p = 0; p < m; ++p) {
          values[unit * m + p] = effects.mean(i, j, t[p]) +
                                 magnitude_shift(spec_.contamination, d, i, spec_.magnitude, t[p]) +
                                 noise[p];
        }
        labels.push_back({ia, jb});
      }
    }
  }
  return FunctionalSample(grid_, n, std::move(values), std::move(labels), kLevels, kLevels);
}

FunctionalSample generate_scenario2(const Scenario2Spec& spec, Rng& rng) {
  return Scenario2Generator(spec)(rng);
}

// ---------------------------------------------------------------------------
// Config text

std::string to_config_text(const Scenario1Spec& spec) {
  std::ostringstream os;
  os << "scenario = 1\n"
     << "model = " << to_string(spec.model) << "\n"
     << "contamination = " << to_string(spec.contamination) << "\n"
     << "sigma_index = " << spec.sigma_index << "\n"
     << "per_group = " << spec.per_group << "\n"
     << "groups = " << spec.groups << "\n"
     << "grid_points = " << spec.grid_points << "\n"
     << "magnitude = " << format_double(spec.magnitude) << "\n"
     << "probability = " << format_double(spec.probability) << "\n";
  return os.str();
}

std::string to_config_text(const Scenario2Spec& spec) {
  std::ostringstream os;
  os << "scenario = 2\n"
     << "a = " << format_double(spec.a) << "\n"
     << "b = " << format_double(spec.b) << "\n"
     << "contamination = " << to_string(spec.contamination) << "\n"
     << "per_cell = " << spec.per_cell << "\n"
     << "grid_points = " << spec.grid_points << "\n"
     << "sigma = " << format_double(spec.sigma) << "\n"
     << "magnitude = " << format_double(spec.magnitude) << "\n"
     << "probability = " << format_double(spec.probability) << "\n";
  return os.str();
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> entries;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + " has no '='");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + " has no key");
    entries[key] = trim(line.substr(eq + 1));
  }
  return entries;
}

Scenario1Spec scenario1_from_config(const std::map<std::string, std::string>& entries) {
  Scenario1Spec spec;
  if (auto it = entries.find("model"); it != entries.end()) spec.model = parse_model(it->second);
  if (auto it = entries.find("contamination"); it != entries.end()) {
    spec.contamination = parse_contamination(it->second);
  }
  spec.sigma_index = static_cast<int>(to_count(entries, "sigma_index", 1));
  spec.per_group = to_count(entries, "per_group", spec.per_group);
  spec.groups = to_count(entries, "groups", spec.groups);
  spec.grid_points = to_count(entries, "grid_points", spec.grid_points);
  spec.magnitude = to_double(entries, "magnitude", spec.magnitude);
  spec.probability = to_double(entries, "probability", spec.probability);
  spec.validate();
  return spec;
}

Scenario2Spec scenario2_from_config(const std::map<std::string, std::string>& entries) {
  Scenario2Spec spec;
  spec.a = to_double(entries, "a", spec.a);
  spec.b = to_double(entries, "b", spec.b);
  if (auto it = entries.find("contamination"); it != entries.end()) {
    spec.contamination = parse_contamination(it->second);
  }
  spec.per_cell = to_count(entries, "per_cell", spec.per_cell);
  spec.grid_points = to_count(entries, "grid_points", spec.grid_points);
  spec.sigma = to_double(entries, "sigma", spec.sigma);
  spec.magnitude = to_double(entries, "magnitude", spec.magnitude);
  spec.probability = to_double(entries, "probability", spec.probability);
  spec.validate();
  return spec;
}

}  // namespace rofanova
