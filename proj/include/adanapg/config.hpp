#ifndef ADANAPG_CONFIG_HPP
#define ADANAPG_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "adanapg/sampling.hpp"
#include "adanapg/solver.hpp"

namespace adanapg {

/// Invalid configuration; the message starts with the offending key.
struct ConfigError : std::runtime_error {
  ConfigError(const std::string& key, const std::string& constraint)
      : std::runtime_error(key + ": " + constraint), key(key) {}
  std::string key;
};

enum class ProblemKind {
  logistic_synthetic,
  logistic_file,
  logistic_population,
  param_estimation,
  lasso_toy
};
enum class SamplingStrategy { adaptive, geometric, polynomial, fixed };

struct ProblemSection {
  ProblemKind kind = ProblemKind::param_estimation;
  Index dimension = 10;
  Index num_samples = 200;  // N
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double sigma_v = 1.0;
  double condition_number = 100.0;
  double label_noise = 0.1;
  std::string data_path;
  std::string data_format = "csv";
  std::uint64_t data_seed = 1;
  std::string xstar_path;
};

struct SolverSection {
  Algorithm algorithm = Algorithm::adanapg;
  Mode mode = Mode::strongly_convex;
  Index max_iterations = 100;
  double stop_gmap_tol = 0.0;
  double pi0 = 1.0;
  std::optional<double> alpha_override;
  std::optional<std::int64_t> max_samples;
  Index oracle_max_iterations = 200000;
  double oracle_tol = 1e-10;
};

struct SamplingSection {
  SamplingStrategy strategy = SamplingStrategy::adaptive;
  double theta = 0.9;
  double nu = 5.5;
  Index k_initial = 2;
  Index k_max = 1'000'000;
  int max_augment_rounds = 10;
  double gmap_floor = 1e-16;
  Index k0 = 2;
  double gamma1 = 0.05;
  double gamma2 = 0.01;
  Index fixed_k = 10;
};

struct ExperimentSection {
  Index replications = 1;
  std::uint64_t base_seed = 42;
  bool record_noise = false;
  bool record_iterates = true;
  bool record_timing = false;
};

/// Diagnostic settings; not part of the config hash.
struct AnalysisSection {
  Index ratefit_lo = 0;
  Index ratefit_hi = -1;  // -1: last iteration
  Index normality_n = -1;  // -1: last iteration
  std::vector<Index> normality_components{0, 1, 2, 3};
  Index stabilization_lag = 25;
  Index histogram_bins = 30;
};

struct ExperimentConfig {
  ProblemSection problem;
  SolverSection solver;
  SamplingSection sampling;
  ExperimentSection experiment;
  AnalysisSection analysis;
  std::string output_directory = "out";

  SolverOptions solver_options() const;
  SamplingSchedule schedule() const;

  /// "section.key=value" lines, sorted, for every hashed field.
  std::string canonical() const;
  /// SHA-256 of canonical(), lowercase hex.
  std::string hash() const;
};

/// Parses an INI-style file ([section] / key = value, '#' or ';' comments).
/// Unknown sections or keys and constraint violations raise ConfigError.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text);

/// Environment variable that overrides output.directory.
inline constexpr const char* kOutputDirEnv = "ADANAPG_OUTPUT_DIR";

std::string sha256_hex(const std::string& data);

std::string to_string(ProblemKind kind);
std::string to_string(Algorithm algorithm);
std::string to_string(Mode mode);
std::string to_string(SamplingStrategy strategy);

}  // namespace adanapg

#endif
