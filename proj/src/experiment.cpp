#include "adanapg/experiment.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <filesystem>
#include <mutex>
#include <ostream>
#include <thread>

#include "adanapg/csv.hpp"
#include "adanapg/problems.hpp"

namespace adanapg {
namespace {

namespace fs = std::filesystem;

std::string rep_file(const std::string& dir, const char* sub, Index j) {
  return (fs::path(dir) / sub / fmt::format("rep_{}.csv", j)).string();
}

std::optional<double> opt_real(const std::string& s, const std::string& where) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw CsvError(where + ": not a number: '" + s + "'");
  }
  return v;
}

double real(const std::string& s, const std::string& where) {
  const auto v = opt_real(s, where);
  if (!v) throw CsvError(where + ": empty field");
  return *v;
}

std::int64_t integer(const std::string& s, const std::string& where) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw CsvError(where + ": not an integer: '" + s + "'");
  }
  return v;
}

void check_hash(const CsvTable& t, const std::string& path, std::string& hash) {
  if (hash.empty()) {
    hash = t.config_hash;
  } else if (t.config_hash != hash) {
    throw HashMismatch(path + ": config hash " + t.config_hash + " differs from " + hash);
  }
}

std::vector<IterationRecord> read_trajectory(const std::string& path, std::string& hash) {
  const CsvTable t = read_csv(path);
  check_hash(t, path, hash);
  const std::size_t c_iter = t.column("iter"), c_k = t.column("batch_size"),
                    c_cum = t.column("cum_samples"), c_obj = t.column("objective"),
                    c_dist = t.column("dist_sq"), c_gmap = t.column("gmap_norm"),
                    c_rounds = t.column("test_rounds"), c_cap = t.column("budget_capped"),
                    c_ns = t.column("elapsed_ns");
  std::vector<IterationRecord> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    IterationRecord r;
    r.n = integer(row[c_iter], path);
    r.batch_size = integer(row[c_k], path);
    r.cum_samples = integer(row[c_cum], path);
    r.objective = opt_real(row[c_obj], path);
    r.dist_sq = opt_real(row[c_dist], path);
    r.gmap_norm = real(row[c_gmap], path);
    r.test_rounds = static_cast<int>(integer(row[c_rounds], path));
    r.budget_capped = row[c_cap] == "1";
    if (!row[c_ns].empty()) r.elapsed_ns = integer(row[c_ns], path);
    out.push_back(std::move(r));
  }
  return out;
}

void read_vectors(const std::string& path, std::vector<IterationRecord>& records, VectorField field,
                  std::string& hash) {
  const CsvTable t = read_csv(path);
  check_hash(t, path, hash);
  if (t.rows.size() != records.size()) throw CsvError(path + ": row count differs from trajectory");
  const auto d = static_cast<Index>(t.header.size()) - 1;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    Vector v(d);
    for (Index i = 0; i < d; ++i) v(i) = real(t.rows[r][static_cast<std::size_t>(i + 1)], path);
    if (field == VectorField::iterate) {
      records[r].iterate = std::move(v);
    } else {
      records[r].noise = std::move(v);
    }
  }
}

std::string output_dir(const ExperimentConfig& config, const CommandOptions& opts) {
  return opts.out ? *opts.out : config.output_directory;
}

unsigned worker_count(unsigned requested, Index replications) {
  unsigned n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<Index>(n, replications));
}

/// Shared front half of solve / experiment / oracle: config, problem, x*.
/// Returns an exit code, or kExitOk with the outputs filled.
int prepare(const CommandOptions& opts, std::ostream& err, ExperimentConfig& config,
            std::unique_ptr<CompositeProblem>& problem, bool resolve) {
  try {
    config = load_config(opts.config_path);
    problem = build_problem(config);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    err << "config error: problem.data_path: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "solver error: building the problem failed: " << e.what() << "\n";
    return kExitSolver;
  }
  if (!resolve) return kExitOk;
  try {
    resolve_optimum(*problem, config);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const CsvError& e) {
    err << "config error: problem.xstar_path: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "solver error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitOk;
}

}  // namespace

std::unique_ptr<CompositeProblem> build_problem(const ExperimentConfig& config) {
  const auto& p = config.problem;
  switch (p.kind) {
    case ProblemKind::logistic_synthetic:
      return std::make_unique<LogisticProblem>(make_synthetic_logistic(
          p.dimension, p.num_samples, p.lambda1, p.lambda2, p.data_seed, p.label_noise));
    case ProblemKind::logistic_file:
      return std::make_unique<LogisticProblem>(load_sparse_dataset(
          p.data_path, p.data_format == "svmlight" ? DatasetFormat::svmlight : DatasetFormat::csv,
          p.lambda1, p.lambda2));
    case ProblemKind::logistic_population:
      return std::make_unique<LogisticPopulationProblem>(p.dimension, p.lambda1, p.lambda2,
                                                         p.data_seed, p.label_noise);
    case ProblemKind::param_estimation:
      return std::make_unique<ParamEstimationProblem>(make_param_estimation(
          p.dimension, p.condition_number, p.sigma_v, p.lambda2, p.data_seed));
    case ProblemKind::lasso_toy:
      return std::make_unique<LassoToyProblem>(
          make_lasso_toy(p.dimension, p.lambda2, p.sigma_v, p.data_seed));
  }
  throw std::logic_error("unhandled problem kind");
}

void resolve_optimum(CompositeProblem& problem, const ExperimentConfig& config) {
  if (problem.known_optimum()) return;
  if (!config.problem.xstar_path.empty()) {
    Vector x = read_point(config.problem.xstar_path);
    if (x.size() != problem.dimension()) {
      throw ConfigError("problem.xstar_path", fmt::format("has {} components, problem dimension is {}",
                                                          x.size(), problem.dimension()));
    }
    problem.set_known_optimum(std::move(x));
    return;
  }
  if (!problem.has_full_gradient()) return;
  const OracleResult r =
      solve_oracle(problem, config.solver.oracle_max_iterations, config.solver.oracle_tol);
  if (!r.converged) {
    throw OracleError(fmt::format("oracle did not converge in {} iterations (gmap norm {:.3e})",
                                  r.iterations, r.gmap_norm));
  }
  problem.set_known_optimum(r.x);
}

std::vector<std::vector<IterationRecord>> run_replications(const CompositeProblem& problem,
                                                           const ExperimentConfig& config,
                                                           unsigned jobs) {
  const Index reps = config.experiment.replications;
  const SolverOptions options = config.solver_options();
  const SamplingSchedule schedule = config.schedule();
  std::vector<std::vector<IterationRecord>> paths(static_cast<std::size_t>(reps));

  std::atomic<Index> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  Index error_rep = reps;
  std::string error_what;

  auto worker = [&] {
    for (;;) {
      const Index j = next.fetch_add(1);
      if (j >= reps || failed.load()) return;
      try {
        RandomStream stream =
            RandomStream::derive(config.experiment.base_seed, static_cast<std::uint64_t>(j));
        paths[static_cast<std::size_t>(j)] = run(problem, options, schedule, stream);
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        if (j < error_rep) {
          error_rep = j;
          error_what = e.what();
        }
        failed.store(true);
      }
    }
  };

  const unsigned n = worker_count(jobs, reps);
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failed) throw ReplicationError(config.experiment.base_seed, error_rep, error_what);
  return paths;
}

EnsembleMetadata ensemble_metadata(const CompositeProblem& problem, const ExperimentConfig& config) {
  EnsembleMetadata meta;
  meta.x_star = problem.known_optimum();
  meta.mu = problem.strong_convexity();
  meta.lipschitz = problem.lipschitz();
  meta.theta = config.sampling.theta;
  meta.nu = config.sampling.nu;
  meta.alpha = solver_step_size(problem, config.solver_options(), config.schedule());
  return meta;
}

void write_ensemble(const std::string& dir, const ExperimentConfig& config,
                    const ReplicationEnsemble& ens) {
  const std::string hash = config.hash();
  fs::create_directories(fs::path(dir) / "trajectories");
  const bool iterates = !ens.paths.empty() && !ens.paths.front().empty() &&
                        ens.paths.front().front().iterate.has_value();
  const bool noise = !ens.paths.empty() && !ens.paths.front().empty() &&
                     ens.paths.front().front().noise.has_value();
  if (iterates) fs::create_directories(fs::path(dir) / "iterates");
  if (noise) fs::create_directories(fs::path(dir) / "noise");

  for (Index j = 0; j < ens.replications(); ++j) {
    const auto& path = ens.paths[static_cast<std::size_t>(j)];
    write_trajectory(rep_file(dir, "trajectories", j), hash, j, path);
    if (iterates) write_vectors(rep_file(dir, "iterates", j), hash, path, VectorField::iterate);
    if (noise) write_vectors(rep_file(dir, "noise", j), hash, path, VectorField::noise);
  }

  CsvWriter summary((fs::path(dir) / "ensemble_summary.csv").string(), hash,
                    {"iter", "mean_objective", "median_objective", "rmse", "mean_cum_samples",
                     "mean_batch_size"});
  for (const auto& row : ensemble_summary(ens)) {
    summary.row({std::to_string(row.n), format_real(row.mean_objective),
                 format_real(row.median_objective), format_real(row.rmse),
                 format_real(row.mean_cum_samples), format_real(row.mean_batch_size)});
  }
  summary.close();

  CsvWriter meta((fs::path(dir) / "metadata.csv").string(), hash, {"key", "value"});
  const Index d = ens.meta.x_star ? ens.meta.x_star->size() : config.problem.dimension;
  meta.row({"dimension", std::to_string(d)});
  meta.row({"replications", std::to_string(ens.replications())});
  meta.row({"mu", format_real(ens.meta.mu)});
  meta.row({"lipschitz", format_real(ens.meta.lipschitz)});
  meta.row({"theta", format_real(ens.meta.theta)});
  meta.row({"nu", format_real(ens.meta.nu)});
  meta.row({"alpha", format_real(ens.meta.alpha)});
  meta.row({"rho", format_real(ens.meta.rho())});
  meta.close();

  if (ens.meta.x_star) write_point((fs::path(dir) / "xstar.csv").string(), hash, *ens.meta.x_star);
}

ReplicationEnsemble load_ensemble(const std::string& dir,
                                  const std::optional<std::string>& expected_hash,
                                  std::string* hash_out) {
  std::string hash = expected_hash.value_or("");
  const std::string meta_path = (fs::path(dir) / "metadata.csv").string();
  if (!fs::exists(meta_path)) throw PreconditionError(dir + " is not an experiment directory");
  const CsvTable meta = read_csv(meta_path);
  check_hash(meta, meta_path, hash);

  ReplicationEnsemble ens;
  Index reps = 0;
  const std::size_t k = meta.column("key"), v = meta.column("value");
  for (const auto& row : meta.rows) {
    const std::string& key = row[k];
    if (key == "replications") reps = integer(row[v], meta_path);
    if (key == "mu") ens.meta.mu = real(row[v], meta_path);
    if (key == "lipschitz") ens.meta.lipschitz = real(row[v], meta_path);
    if (key == "theta") ens.meta.theta = real(row[v], meta_path);
    if (key == "nu") ens.meta.nu = real(row[v], meta_path);
    if (key == "alpha") ens.meta.alpha = real(row[v], meta_path);
  }
  const std::string xstar_path = (fs::path(dir) / "xstar.csv").string();
  if (fs::exists(xstar_path)) {
    check_hash(read_csv(xstar_path), xstar_path, hash);
    ens.meta.x_star = read_point(xstar_path);
  }
  for (Index j = 0; j < reps; ++j) {
    auto path = read_trajectory(rep_file(dir, "trajectories", j), hash);
    const std::string it = rep_file(dir, "iterates", j);
    if (fs::exists(it)) read_vectors(it, path, VectorField::iterate, hash);
    const std::string nz = rep_file(dir, "noise", j);
    if (fs::exists(nz)) read_vectors(nz, path, VectorField::noise, hash);
    ens.paths.push_back(std::move(path));
  }
  if (hash_out) *hash_out = hash;
  return ens;
}

int cmd_solve(const CommandOptions& opts, std::ostream& err) {
  ExperimentConfig config;
  std::unique_ptr<CompositeProblem> problem;
  if (int code = prepare(opts, err, config, problem, true); code != kExitOk) return code;
  if (config.experiment.replications != 1) {
    err << "config error: experiment.replications: solve runs exactly 1 replication\n";
    return kExitConfig;
  }
  std::vector<std::vector<IterationRecord>> paths;
  try {
    paths = run_replications(*problem, config, 1);
  } catch (const ReplicationError& e) {
    err << "solver error: " << e.what() << "\n";
    return kExitSolver;
  }
  const std::string dir = output_dir(config, opts);
  try {
    fs::create_directories(dir);
    write_trajectory((fs::path(dir) / "trajectory.csv").string(), config.hash(), 0, paths.front());
  } catch (const std::exception& e) {
    err << "output error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitOk;
}

int cmd_experiment(const CommandOptions& opts, std::ostream& err) {
  ExperimentConfig config;
  std::unique_ptr<CompositeProblem> problem;
  if (int code = prepare(opts, err, config, problem, true); code != kExitOk) return code;
  ReplicationEnsemble ens;
  try {
    ens.paths = run_replications(*problem, config, opts.jobs);
  } catch (const ReplicationError& e) {
    err << "solver error: " << e.what() << "\n";
    return kExitSolver;
  }
  ens.meta = ensemble_metadata(*problem, config);
  try {
    write_ensemble(output_dir(config, opts), config, ens);
  } catch (const std::exception& e) {
    err << "output error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitOk;
}

int cmd_oracle(const CommandOptions& opts, std::ostream& err) {
  ExperimentConfig config;
  std::unique_ptr<CompositeProblem> problem;
  if (int code = prepare(opts, err, config, problem, false); code != kExitOk) return code;
  if (!problem->has_full_gradient()) {
    err << "config error: problem.kind: capability error: " << to_string(config.problem.kind)
        << " has no exact gradient\n";
    return kExitConfig;
  }
  std::optional<Vector> start;
  if (!config.problem.xstar_path.empty()) {
    try {
      start = read_point(config.problem.xstar_path);
    } catch (const std::exception& e) {
      err << "config error: problem.xstar_path: " << e.what() << "\n";
      return kExitConfig;
    }
    if (start->size() != problem->dimension()) {
      err << "config error: problem.xstar_path: dimension differs from problem.dimension\n";
      return kExitConfig;
    }
  }
  const OracleResult r = solve_oracle(*problem, config.solver.oracle_max_iterations,
                                      config.solver.oracle_tol, start);
  if (!r.converged) {
    err << fmt::format("solver error: oracle did not converge in {} iterations (gmap norm {:.17g})\n",
                       r.iterations, r.gmap_norm);
    return kExitSolver;
  }
  const std::string dir = output_dir(config, opts);
  try {
    fs::create_directories(dir);
    write_point((fs::path(dir) / "xstar.csv").string(), config.hash(), r.x);
  } catch (const std::exception& e) {
    err << "output error: " << e.what() << "\n";
    return kExitSolver;
  }
  err << fmt::format("oracle converged in {} iterations, gmap norm {:.17g}\n", r.iterations,
                     r.gmap_norm);
  return kExitOk;
}

int cmd_analyze(const std::string& ensemble_dir, const std::vector<std::string>& diagnostics,
                const CommandOptions& opts, std::ostream& err) {
  for (const auto& d : diagnostics) {
    const auto& known = known_diagnostics();
    if (std::find(known.begin(), known.end(), d) == known.end()) {
      err << "config error: --diagnostics: unknown diagnostic '" << d << "'\n";
      return kExitConfig;
    }
  }
  AnalysisSection settings;
  std::optional<std::string> expected;
  if (!opts.config_path.empty()) {
    try {
      const ExperimentConfig config = load_config(opts.config_path);
      settings = config.analysis;
      expected = config.hash();
    } catch (const ConfigError& e) {
      err << "config error: " << e.what() << "\n";
      return kExitConfig;
    }
  }

  ReplicationEnsemble ens;
  std::string hash;
  try {
    ens = load_ensemble(ensemble_dir, expected, &hash);
  } catch (const HashMismatch& e) {
    err << "hash mismatch: " << e.what() << "\n";
    return kExitHashMismatch;
  } catch (const std::exception& e) {
    err << "precondition: cannot load ensemble: " << e.what() << "\n";
    return kExitPrecondition;
  }

  const std::string out = opts.out ? *opts.out : (fs::path(ensemble_dir) / "analysis").string();
  fs::create_directories(out);
  auto file = [&](const std::string& name) { return (fs::path(out) / name).string(); };
  const double rho = ens.meta.rho();

  for (const auto& diag : diagnostics) {
    try {
      const Index len = ens.common_length();
      if (diag == "rmse") {
        CsvWriter w(file("rmse.csv"), hash, {"iter", "rmse"});
        for (const auto& p : rmse_curve(ens)) w.row({std::to_string(p.n), format_real(p.value)});
        w.close();
      } else if (diag == "ratefit") {
        const auto curve = rmse_curve(ens);
        const Index hi = settings.ratefit_hi < 0 ? len - 1 : std::min(settings.ratefit_hi, len - 1);
        const RateFit fit = rate_fit(curve, settings.ratefit_lo, hi, rho);
        CsvWriter w(file("ratefit.csv"), hash,
                    {"n_lo", "n_hi", "slope", "intercept", "r_squared", "theoretical_slope", "ratio"});
        w.row({std::to_string(settings.ratefit_lo), std::to_string(hi), format_real(fit.slope),
               format_real(fit.intercept), format_real(fit.r_squared),
               format_real(fit.theoretical_slope), format_real(fit.slope / fit.theoretical_slope)});
        w.close();
      } else if (diag == "efficiency") {
        CsvWriter w(file("efficiency.csv"), hash, {"iter", "mean_cum_samples", "mean_objective"});
        for (const auto& p : efficiency_curve(ens)) {
          w.row({std::to_string(p.n), format_real(p.mean_cum_samples), format_real(p.mean_objective)});
        }
        w.close();
      } else if (diag == "deltaw") {
        CsvWriter w(file("deltaw.csv"), hash, {"iter", "delta_w"});
        for (const auto& p : covariance_gap_curve(ens, rho)) {
          w.row({std::to_string(p.n), format_real(p.value)});
        }
        w.close();
      } else if (diag == "normality") {
        const Index n = settings.normality_n < 0 ? len - 1 : settings.normality_n;
        const NormalityReport report = normality_report(ens, n, settings.normality_components);
        CsvWriter w(file("normality.csv"), hash,
                    {"component", "mean", "variance", "skewness", "excess_kurtosis", "skewness_ok",
                     "kurtosis_ok", "pass"});
        for (const auto& c : report.components) {
          w.row({std::to_string(c.component), format_real(c.mean), format_real(c.variance),
                 format_real(c.skewness), format_real(c.excess_kurtosis), c.skewness_ok ? "1" : "0",
                 c.kurtosis_ok ? "1" : "0", c.pass() ? "1" : "0"});
        }
        w.close();

        std::vector<std::string> header{"row"};
        for (Index c = 0; c < report.covariance.cols(); ++c) header.push_back(fmt::format("c_{}", c));
        CsvWriter cov(file("normality_covariance.csv"), hash, header);
        for (Index r = 0; r < report.covariance.rows(); ++r) {
          std::vector<std::string> row{std::to_string(r)};
          for (Index c = 0; c < report.covariance.cols(); ++c) {
            row.push_back(format_real(report.covariance(r, c)));
          }
          cov.row(row);
        }
        cov.close();

        CsvWriter sum(file("normality_summary.csv"), hash, {"key", "value"});
        sum.row({"n_terminal", std::to_string(report.n_terminal)});
        sum.row({"replications", std::to_string(report.replications)});
        sum.row({"skewness_threshold", format_real(report.skewness_threshold)});
        sum.row({"kurtosis_threshold", format_real(report.kurtosis_threshold)});
        sum.row({"passing_components", std::to_string(report.passing())});
        sum.row({"min_eigenvalue", format_real(report.min_eigenvalue)});
        const Index n_a = n - settings.stabilization_lag;
        sum.row({"stabilization_n", n_a >= 1 ? std::to_string(n_a) : std::string()});
        sum.row({"stabilization_gap",
                 n_a >= 1 ? format_real(covariance_stabilization_gap(ens, n_a, n)) : std::string()});
        sum.close();

        const Matrix errors = scaled_errors(ens, n);
        for (Index comp : settings.normality_components) {
          const Vector values = errors.row(comp).transpose();
          const Histogram h =
              histogram({values.data(), static_cast<std::size_t>(values.size())}, settings.histogram_bins);
          CsvWriter hw(file(fmt::format("normality_histogram_{}.csv", comp)), hash,
                       {"bin", "lo", "hi", "count"});
          const double width = (h.hi - h.lo) / static_cast<double>(h.counts.size());
          for (std::size_t b = 0; b < h.counts.size(); ++b) {
            hw.row({std::to_string(b), format_real(h.lo + width * static_cast<double>(b)),
                    format_real(h.lo + width * static_cast<double>(b + 1)),
                    std::to_string(h.counts[b])});
          }
          hw.close();
        }
      } else if (diag == "samplecomplexity") {
        CsvWriter w(file("samplecomplexity.csv"), hash, {"iter", "median_product"});
        for (const auto& p : sample_complexity_check(ens)) {
          w.row({std::to_string(p.n), format_real(p.value)});
        }
        w.close();
      }
    } catch (const PreconditionError& e) {
      err << "precondition: " << diag << ": " << e.what() << "\n";
      return kExitPrecondition;
    } catch (const NumericalError& e) {
      err << "precondition: " << diag << ": " << e.what() << "\n";
      return kExitPrecondition;
    }
  }
  return kExitOk;
}

}  // namespace adanapg
