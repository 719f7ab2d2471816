#include "adanapg/config.hpp"

#include <openssl/evp.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace adanapg {
namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(key, "expected a real number, got '" + s + "'");
  }
  if (!std::isfinite(v)) throw ConfigError(key, "must be finite");
  return v;
}

std::int64_t parse_int(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(key, "expected an integer, got '" + s + "'");
  }
  return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(key, "expected a nonnegative integer, got '" + s + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(key, "expected true or false, got '" + s + "'");
}

template <typename Enum>
Enum parse_enum(const std::string& key, const std::string& text,
                const std::vector<std::pair<const char*, Enum>>& names) {
  const std::string s = trim(text);
  std::string allowed;
  for (const auto& [name, value] : names) {
    if (s == name) return value;
    allowed += allowed.empty() ? name : std::string(", ") + name;
  }
  throw ConfigError(key, "must be one of {" + allowed + "}, got '" + s + "'");
}

const std::vector<std::pair<const char*, ProblemKind>> kProblemKinds{
    {"logistic_synthetic", ProblemKind::logistic_synthetic},
    {"logistic_file", ProblemKind::logistic_file},
    {"logistic_population", ProblemKind::logistic_population},
    {"param_estimation", ProblemKind::param_estimation},
    {"lasso_toy", ProblemKind::lasso_toy}};
const std::vector<std::pair<const char*, Algorithm>> kAlgorithms{
    {"adanapg", Algorithm::adanapg},
    {"prox_gradient", Algorithm::prox_gradient},
    {"accel_prox_gradient", Algorithm::accel_prox_gradient},
    {"full_gradient_accel", Algorithm::full_gradient_accel}};
const std::vector<std::pair<const char*, Mode>> kModes{{"general", Mode::general},
                                                       {"strongly_convex", Mode::strongly_convex}};
const std::vector<std::pair<const char*, SamplingStrategy>> kStrategies{
    {"adaptive", SamplingStrategy::adaptive},
    {"geometric", SamplingStrategy::geometric},
    {"polynomial", SamplingStrategy::polynomial},
    {"fixed", SamplingStrategy::fixed}};

template <typename Enum>
std::string enum_name(Enum value, const std::vector<std::pair<const char*, Enum>>& names) {
  for (const auto& [name, v] : names) {
    if (v == value) return name;
  }
  return "?";
}

std::vector<Index> parse_index_list(const std::string& key, const std::string& text) {
  std::vector<Index> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_int(key, item));
  if (out.empty()) throw ConfigError(key, "expected a comma-separated list of integers");
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string&)>;

const std::map<std::string, std::map<std::string, Setter>>& setters() {
  static const std::map<std::string, std::map<std::string, Setter>> table{
      {"problem",
       {
           {"kind", [](auto& c, auto& k, auto& v) { c.problem.kind = parse_enum(k, v, kProblemKinds); }},
           {"dimension", [](auto& c, auto& k, auto& v) { c.problem.dimension = parse_int(k, v); }},
           {"N", [](auto& c, auto& k, auto& v) { c.problem.num_samples = parse_int(k, v); }},
           {"lambda1", [](auto& c, auto& k, auto& v) { c.problem.lambda1 = parse_double(k, v); }},
           {"lambda2", [](auto& c, auto& k, auto& v) { c.problem.lambda2 = parse_double(k, v); }},
           {"sigma_v", [](auto& c, auto& k, auto& v) { c.problem.sigma_v = parse_double(k, v); }},
           {"condition_number",
            [](auto& c, auto& k, auto& v) { c.problem.condition_number = parse_double(k, v); }},
           {"label_noise", [](auto& c, auto& k, auto& v) { c.problem.label_noise = parse_double(k, v); }},
           {"data_path", [](auto& c, auto&, auto& v) { c.problem.data_path = trim(v); }},
           {"data_format", [](auto& c, auto&, auto& v) { c.problem.data_format = trim(v); }},
           {"data_seed", [](auto& c, auto& k, auto& v) { c.problem.data_seed = parse_uint(k, v); }},
           {"xstar_path", [](auto& c, auto&, auto& v) { c.problem.xstar_path = trim(v); }},
       }},
      {"solver",
       {
           {"algorithm", [](auto& c, auto& k, auto& v) { c.solver.algorithm = parse_enum(k, v, kAlgorithms); }},
           {"mode", [](auto& c, auto& k, auto& v) { c.solver.mode = parse_enum(k, v, kModes); }},
           {"max_iterations", [](auto& c, auto& k, auto& v) { c.solver.max_iterations = parse_int(k, v); }},
           {"stop_gmap_tol", [](auto& c, auto& k, auto& v) { c.solver.stop_gmap_tol = parse_double(k, v); }},
           {"pi0", [](auto& c, auto& k, auto& v) { c.solver.pi0 = parse_double(k, v); }},
           {"alpha_override",
            [](auto& c, auto& k, auto& v) {
              if (trim(v).empty()) {
                c.solver.alpha_override.reset();
              } else {
                c.solver.alpha_override = parse_double(k, v);
              }
            }},
           {"max_samples",
            [](auto& c, auto& k, auto& v) {
              if (trim(v).empty()) {
                c.solver.max_samples.reset();
              } else {
                c.solver.max_samples = parse_int(k, v);
              }
            }},
           {"oracle_max_iterations",
            [](auto& c, auto& k, auto& v) { c.solver.oracle_max_iterations = parse_int(k, v); }},
           {"oracle_tol", [](auto& c, auto& k, auto& v) { c.solver.oracle_tol = parse_double(k, v); }},
       }},
      {"sampling",
       {
           {"strategy", [](auto& c, auto& k, auto& v) { c.sampling.strategy = parse_enum(k, v, kStrategies); }},
           {"theta", [](auto& c, auto& k, auto& v) { c.sampling.theta = parse_double(k, v); }},
           {"nu", [](auto& c, auto& k, auto& v) { c.sampling.nu = parse_double(k, v); }},
           {"k_initial", [](auto& c, auto& k, auto& v) { c.sampling.k_initial = parse_int(k, v); }},
           {"k_max", [](auto& c, auto& k, auto& v) { c.sampling.k_max = parse_int(k, v); }},
           {"max_augment_rounds",
            [](auto& c, auto& k, auto& v) {
              c.sampling.max_augment_rounds = static_cast<int>(parse_int(k, v));
            }},
           {"gmap_floor", [](auto& c, auto& k, auto& v) { c.sampling.gmap_floor = parse_double(k, v); }},
           {"k0", [](auto& c, auto& k, auto& v) { c.sampling.k0 = parse_int(k, v); }},
           {"gamma1", [](auto& c, auto& k, auto& v) { c.sampling.gamma1 = parse_double(k, v); }},
           {"gamma2", [](auto& c, auto& k, auto& v) { c.sampling.gamma2 = parse_double(k, v); }},
           {"fixed_k", [](auto& c, auto& k, auto& v) { c.sampling.fixed_k = parse_int(k, v); }},
       }},
      {"experiment",
       {
           {"replications", [](auto& c, auto& k, auto& v) { c.experiment.replications = parse_int(k, v); }},
           {"base_seed", [](auto& c, auto& k, auto& v) { c.experiment.base_seed = parse_uint(k, v); }},
           {"record_noise", [](auto& c, auto& k, auto& v) { c.experiment.record_noise = parse_bool(k, v); }},
           {"record_iterates",
            [](auto& c, auto& k, auto& v) { c.experiment.record_iterates = parse_bool(k, v); }},
           {"record_timing", [](auto& c, auto& k, auto& v) { c.experiment.record_timing = parse_bool(k, v); }},
       }},
      {"analysis",
       {
           {"ratefit_lo", [](auto& c, auto& k, auto& v) { c.analysis.ratefit_lo = parse_int(k, v); }},
           {"ratefit_hi", [](auto& c, auto& k, auto& v) { c.analysis.ratefit_hi = parse_int(k, v); }},
           {"normality_n", [](auto& c, auto& k, auto& v) { c.analysis.normality_n = parse_int(k, v); }},
           {"normality_components",
            [](auto& c, auto& k, auto& v) { c.analysis.normality_components = parse_index_list(k, v); }},
           {"stabilization_lag",
            [](auto& c, auto& k, auto& v) { c.analysis.stabilization_lag = parse_int(k, v); }},
           {"histogram_bins", [](auto& c, auto& k, auto& v) { c.analysis.histogram_bins = parse_int(k, v); }},
       }},
      {"output",
       {
           {"directory", [](auto& c, auto&, auto& v) { c.output_directory = trim(v); }},
       }},
  };
  return table;
}

void validate(const ExperimentConfig& c) {
  const auto& p = c.problem;
  if (p.dimension < 1) throw ConfigError("problem.dimension", "must be >= 1");
  if (p.num_samples < 1) throw ConfigError("problem.N", "must be >= 1");
  if (!(p.lambda1 >= 0.0)) throw ConfigError("problem.lambda1", "must be >= 0");
  if (!(p.lambda2 >= 0.0)) throw ConfigError("problem.lambda2", "must be >= 0");
  if (!(p.sigma_v >= 0.0)) throw ConfigError("problem.sigma_v", "must be >= 0");
  if (!(p.condition_number >= 1.0)) throw ConfigError("problem.condition_number", "must be >= 1");
  if (!(p.label_noise >= 0.0 && p.label_noise <= 1.0)) {
    throw ConfigError("problem.label_noise", "must lie in [0, 1]");
  }
  if (p.data_format != "csv" && p.data_format != "svmlight") {
    throw ConfigError("problem.data_format", "must be one of {csv, svmlight}");
  }
  if (p.kind == ProblemKind::logistic_file && p.data_path.empty()) {
    throw ConfigError("problem.data_path", "required when problem.kind = logistic_file");
  }
  if (p.kind == ProblemKind::lasso_toy && !(p.lambda2 > 0.0)) {
    throw ConfigError("problem.lambda2", "must be > 0 for lasso_toy");
  }

  const auto& s = c.solver;
  if (s.max_iterations < 0) throw ConfigError("solver.max_iterations", "must be >= 0");
  if (!(s.stop_gmap_tol >= 0.0)) throw ConfigError("solver.stop_gmap_tol", "must be >= 0");
  if (!(s.pi0 > 0.0 && s.pi0 <= 1.0)) throw ConfigError("solver.pi0", "must lie in (0, 1]");
  if (s.alpha_override && !(*s.alpha_override > 0.0)) {
    throw ConfigError("solver.alpha_override", "must be > 0");
  }
  if (s.max_samples && *s.max_samples < 1) throw ConfigError("solver.max_samples", "must be >= 1");
  if (s.oracle_max_iterations < 1) throw ConfigError("solver.oracle_max_iterations", "must be >= 1");
  if (!(s.oracle_tol >= 0.0)) throw ConfigError("solver.oracle_tol", "must be >= 0");
  const bool logistic_mu_zero = (p.kind == ProblemKind::logistic_synthetic ||
                                 p.kind == ProblemKind::logistic_file ||
                                 p.kind == ProblemKind::logistic_population) &&
                                p.lambda1 == 0.0;
  if (s.mode == Mode::strongly_convex && logistic_mu_zero) {
    throw ConfigError("solver.mode", "strongly_convex requires problem.lambda1 > 0");
  }

  const auto& m = c.sampling;
  if (!(m.theta > 0.0)) throw ConfigError("sampling.theta", "must be > 0");
  if (!(m.nu > 0.0)) throw ConfigError("sampling.nu", "must be > 0");
  if (m.k_initial < 2) throw ConfigError("sampling.k_initial", "must be >= 2");
  if (m.k_max < m.k_initial) throw ConfigError("sampling.k_max", "must be >= sampling.k_initial");
  if (m.max_augment_rounds < 1) throw ConfigError("sampling.max_augment_rounds", "must be >= 1");
  if (!(m.gmap_floor >= 0.0)) throw ConfigError("sampling.gmap_floor", "must be >= 0");
  if (m.k0 < 1) throw ConfigError("sampling.k0", "must be >= 1");
  if (!(m.gamma1 > 0.0)) throw ConfigError("sampling.gamma1", "must be > 0");
  if (!(m.gamma2 > 0.0)) throw ConfigError("sampling.gamma2", "must be > 0");
  if (m.fixed_k < 1) throw ConfigError("sampling.fixed_k", "must be >= 1");
  if (s.algorithm == Algorithm::adanapg && m.strategy != SamplingStrategy::adaptive) {
    throw ConfigError("sampling.strategy", "solver.algorithm = adanapg requires adaptive");
  }

  const auto& e = c.experiment;
  if (e.replications < 1) throw ConfigError("experiment.replications", "must be >= 1");
  if (e.record_noise && p.kind == ProblemKind::logistic_population) {
    throw ConfigError("experiment.record_noise",
                      "capability error: problem.kind = logistic_population has no exact gradient");
  }
  if (s.algorithm == Algorithm::full_gradient_accel && p.kind == ProblemKind::logistic_population) {
    throw ConfigError("solver.algorithm",
                      "capability error: problem.kind = logistic_population has no exact gradient");
  }

  const auto& a = c.analysis;
  if (a.ratefit_lo < 0) throw ConfigError("analysis.ratefit_lo", "must be >= 0");
  if (a.ratefit_hi >= 0 && a.ratefit_hi <= a.ratefit_lo) {
    throw ConfigError("analysis.ratefit_hi", "must be -1 or > analysis.ratefit_lo");
  }
  for (Index comp : a.normality_components) {
    if (comp < 0 || comp >= 2 * p.dimension) {
      throw ConfigError("analysis.normality_components", "indices must lie in [0, 2 * dimension)");
    }
  }
  if (a.stabilization_lag < 1) throw ConfigError("analysis.stabilization_lag", "must be >= 1");
  if (a.histogram_bins < 1) throw ConfigError("analysis.histogram_bins", "must be >= 1");
  if (c.output_directory.empty()) throw ConfigError("output.directory", "must not be empty");
}

ExperimentConfig from_tree(const pt::ptree& tree) {
  ExperimentConfig config;
  const auto& table = setters();
  for (const auto& [section, body] : tree) {
    const auto sit = table.find(section);
    if (body.empty()) throw ConfigError(section, "key outside of any [section]");
    if (sit == table.end()) throw ConfigError(section, "unknown section");
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      const auto kit = sit->second.find(key);
      if (kit == sit->second.end()) throw ConfigError(full, "unknown key");
      kit->second(config, full, value.data());
    }
  }
  if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0') {
    config.output_directory = dir;
  }
  validate(config);
  return config;
}

ExperimentConfig parse_stream(std::istream& in, const std::string& origin) {
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(origin + ":" + std::to_string(e.line()), e.message());
  }
  return from_tree(tree);
}

std::string g17(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

std::string to_string(ProblemKind kind) { return enum_name(kind, kProblemKinds); }
std::string to_string(Algorithm algorithm) { return enum_name(algorithm, kAlgorithms); }
std::string to_string(Mode mode) { return enum_name(mode, kModes); }
std::string to_string(SamplingStrategy strategy) { return enum_name(strategy, kStrategies); }

ExperimentConfig parse_config(const std::string& text) {
  std::istringstream in(text);
  return parse_stream(in, "<config>");
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  return parse_stream(in, path);
}

SolverOptions ExperimentConfig::solver_options() const {
  SolverOptions o;
  o.algorithm = solver.algorithm;
  o.mode = solver.mode;
  o.max_iterations = solver.max_iterations;
  o.stop_gmap_tol = solver.stop_gmap_tol;
  o.pi0 = solver.pi0;
  o.theta = sampling.theta;
  o.nu = sampling.nu;
  o.alpha_override = solver.alpha_override;
  o.max_samples = solver.max_samples;
  o.record_noise = experiment.record_noise;
  o.record_iterates = experiment.record_iterates;
  o.record_timing = experiment.record_timing;
  return o;
}

SamplingSchedule ExperimentConfig::schedule() const {
  switch (sampling.strategy) {
    case SamplingStrategy::adaptive: {
      AdaptiveTestParams a;
      a.theta = sampling.theta;
      a.nu = sampling.nu;
      a.k_initial = sampling.k_initial;
      a.k_max = sampling.k_max;
      a.max_augment_rounds = sampling.max_augment_rounds;
      a.gmap_floor = sampling.gmap_floor;
      return {a};
    }
    case SamplingStrategy::geometric:
      return {GeometricSchedule{sampling.k0, sampling.gamma1}};
    case SamplingStrategy::polynomial:
      return {PolynomialSchedule{sampling.k0, sampling.gamma2}};
    case SamplingStrategy::fixed:
      return {FixedSchedule{sampling.fixed_k}};
  }
  throw std::logic_error("unhandled sampling strategy");
}

std::string ExperimentConfig::canonical() const {
  std::vector<std::string> lines{
      "problem.kind=" + to_string(problem.kind),
      "problem.dimension=" + std::to_string(problem.dimension),
      "problem.N=" + std::to_string(problem.num_samples),
      "problem.lambda1=" + g17(problem.lambda1),
      "problem.lambda2=" + g17(problem.lambda2),
      "problem.sigma_v=" + g17(problem.sigma_v),
      "problem.condition_number=" + g17(problem.condition_number),
      "problem.label_noise=" + g17(problem.label_noise),
      "problem.data_path=" + problem.data_path,
      "problem.data_format=" + problem.data_format,
      "problem.data_seed=" + std::to_string(problem.data_seed),
      "problem.xstar_path=" + problem.xstar_path,
      "solver.algorithm=" + to_string(solver.algorithm),
      "solver.mode=" + to_string(solver.mode),
      "solver.max_iterations=" + std::to_string(solver.max_iterations),
      "solver.stop_gmap_tol=" + g17(solver.stop_gmap_tol),
      "solver.pi0=" + g17(solver.pi0),
      "solver.alpha_override=" + (solver.alpha_override ? g17(*solver.alpha_override) : ""),
      "solver.max_samples=" + (solver.max_samples ? std::to_string(*solver.max_samples) : ""),
      "solver.oracle_max_iterations=" + std::to_string(solver.oracle_max_iterations),
      "solver.oracle_tol=" + g17(solver.oracle_tol),
      "sampling.strategy=" + to_string(sampling.strategy),
      "sampling.theta=" + g17(sampling.theta),
      "sampling.nu=" + g17(sampling.nu),
      "sampling.k_initial=" + std::to_string(sampling.k_initial),
      "sampling.k_max=" + std::to_string(sampling.k_max),
      "sampling.max_augment_rounds=" + std::to_string(sampling.max_augment_rounds),
      "sampling.gmap_floor=" + g17(sampling.gmap_floor),
      "sampling.k0=" + std::to_string(sampling.k0),
      "sampling.gamma1=" + g17(sampling.gamma1),
      "sampling.gamma2=" + g17(sampling.gamma2),
      "sampling.fixed_k=" + std::to_string(sampling.fixed_k),
      "experiment.replications=" + std::to_string(experiment.replications),
      "experiment.base_seed=" + std::to_string(experiment.base_seed),
      "experiment.record_noise=" + std::string(experiment.record_noise ? "true" : "false"),
      "experiment.record_iterates=" + std::string(experiment.record_iterates ? "true" : "false"),
      "experiment.record_timing=" + std::string(experiment.record_timing ? "true" : "false"),
  };
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& line : lines) out += line + "\n";
  return out;
}

std::string ExperimentConfig::hash() const { return sha256_hex(canonical()); }

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

}  // namespace adanapg
