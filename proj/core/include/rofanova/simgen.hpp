#pragma once

// Synthetic functional samples for size and power studies.
//
// Errors are zero-mean Gaussian processes on [0, 1] with covariance
//     gamma(s, t) = sigma^2 exp(-|s - t| * k * 1e-5).
// Scenario 1 is a one-way design (3 groups x 20 curves) with main effects
// M1-M3; Scenario 2 is a balanced 2 x 2 design (20 curves per cell) with
// effects driven by the parameters a and b. Both support contaminations C0-C6:
//   C1  B U M on the whole curve          C2  B U M on t >= T
//   C3  (-1)^i B M on the whole curve     C4  (-1)^i B M on t >= T
//   C5  with probability p, errors from the process with k = 1e2
//   C6  as C5 with k = 10^(2 + i)
// where B ~ Bernoulli(p), U uniform on {-1, 1}, T ~ U(0, 0.75), drawn per curve.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rofanova/grid.hpp"
#include "rofanova/rng.hpp"

namespace rofanova {

struct GpSpec {
  double sigma = 1.0;
  double rate_scale = 1.0;  // k
  DomainGrid grid = DomainGrid::line(25);

  void validate() const;
};

double gp_covariance(const GpSpec& spec, double s, double t);

/// Lower Cholesky factor (row-major n x n) of a symmetric matrix. Retries with
/// diagonal jitter 1e-12, 1e-11, ..., 1e-8 times the largest diagonal entry
/// and throws NumericError when every attempt fails.
std::vector<double> cholesky_with_jitter(std::span<const double> matrix, std::size_t n,
                                         double* jitter_used = nullptr);

/// Gaussian process on a 1D grid with a cached covariance factor.
class GaussianProcess {
 public:
  explicit GaussianProcess(const GpSpec& spec);

  const GpSpec& spec() const { return spec_; }
  double jitter() const { return jitter_; }

  void draw_into(Rng& rng, std::span<double> out) const;
  GridFunction draw(Rng& rng) const;

 private:
  GpSpec spec_;
  std::vector<double> factor_;
  double jitter_ = 0.0;
};

std::vector<GridFunction> gp_sample(const GpSpec& spec, std::size_t count, Rng& rng);

enum class Model { M1, M2, M3 };
enum class Contamination { C0, C1, C2, C3, C4, C5, C6 };

std::string to_string(Model model);
std::string to_string(Contamination c);
Model parse_model(const std::string& name);
Contamination parse_contamination(const std::string& name);

/// sigma_1 .. sigma_6 = 1/25, 1.8/25, 2.6/25, 3.4/25, 4.2/25, 5/25.
double scenario1_sigma(int index);

/// f_i(t) for level i in {1, 2, 3}.
double scenario1_effect(Model model, int level, double t);

struct Scenario1Spec {
  Model model = Model::M1;
  Contamination contamination = Contamination::C0;
  int sigma_index = 1;
  std::size_t per_group = 20;
  std::size_t groups = 3;
  std::size_t grid_points = 25;
  double magnitude = 25.0;     // M
  double probability = 0.1;    // p

  double sigma() const { return scenario1_sigma(sigma_index); }
  void validate() const;
};

struct Scenario2Effects {
  double a = 0.0;
  double b = 0.0;

  double grand(double t) const;                  // m(t) = t (1 - t)
  double row(int i, double t) const;             // f_i(t) = a (-1)^i |sin(4 pi t)|
  double col(int j, double t) const;             // g_j(t) = b (-1)^j I(t > 0.5)
  double interaction(int i, int j, double t) const;  // -f_i g_j I(a >= 0.25)
  double mean(int i, int j, double t) const;
};

struct Scenario2Spec {
  double a = 0.0;
  double b = 0.0;
  Contamination contamination = Contamination::C0;
  std::size_t per_cell = 20;
  std::size_t grid_points = 25;
  double sigma = 0.3;
  double magnitude = 25.0;
  double probability = 0.1;

  void validate() const;
};

/// Generators cache their Gaussian-process factors; calls are const and
/// thread-safe given distinct RNGs.
class Scenario1Generator {
 public:
  explicit Scenario1Generator(const Scenario1Spec& spec);
  FunctionalSample operator()(Rng& rng) const;
  const Scenario1Spec& spec() const { return spec_; }

 private:
  Scenario1Spec spec_;
  DomainGrid grid_;
  GaussianProcess base_;
  std::vector<GaussianProcess> shape_;  // per level, C5/C6 only
};

class Scenario2Generator {
 public:
  explicit Scenario2Generator(const Scenario2Spec& spec);
  FunctionalSample operator()(Rng& rng) const;
  const Scenario2Spec& spec() const { return spec_; }

 private:
  Scenario2Spec spec_;
  DomainGrid grid_;
  GaussianProcess base_;
  std::vector<GaussianProcess> shape_;
};

FunctionalSample generate_scenario1(const Scenario1Spec& spec, Rng& rng);
FunctionalSample generate_scenario2(const Scenario2Spec& spec, Rng& rng);

/// Plain-text `key = value` form, one entry per line; '#' starts a comment.
std::string to_config_text(const Scenario1Spec& spec);
std::string to_config_text(const Scenario2Spec& spec);
std::map<std::string, std::string> parse_config_text(const std::string& text);
Scenario1Spec scenario1_from_config(const std::map<std::string, std::string>& entries);
Scenario2Spec scenario2_from_config(const std::map<std::string, std::string>& entries);

}  // namespace rofanova
