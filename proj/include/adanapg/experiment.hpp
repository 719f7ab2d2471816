#ifndef ADANAPG_EXPERIMENT_HPP
#define ADANAPG_EXPERIMENT_HPP

#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "adanapg/analysis.hpp"
#include "adanapg/config.hpp"
#include "adanapg/core.hpp"
#include "adanapg/solver.hpp"

namespace adanapg {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitSolver = 3,
  kExitHashMismatch = 4,
  kExitPrecondition = 5,
};

/// A replication threw; carries the stream identity that reproduces it.
struct ReplicationError : std::runtime_error {
  ReplicationError(std::uint64_t seed, Index replication, const std::string& what)
      : std::runtime_error("replication " + std::to_string(replication) + " (base_seed " +
                           std::to_string(seed) + ") failed: " + what),
        seed(seed),
        replication(replication) {}
  std::uint64_t seed;
  Index replication;
};

/// The oracle solve stopped before reaching its tolerance.
struct OracleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::unique_ptr<CompositeProblem> build_problem(const ExperimentConfig& config);

/// Fills problem.known_optimum() from, in order: the problem's own closed
/// form, problem.xstar_path, or an oracle solve when the exact gradient is
/// available. Leaves it empty otherwise.
void resolve_optimum(CompositeProblem& problem, const ExperimentConfig& config);

/// Runs replications 0 .. R-1 on `jobs` workers. Replication j uses
/// stream (base_seed, j), so results do not depend on `jobs`.
std::vector<std::vector<IterationRecord>> run_replications(const CompositeProblem& problem,
                                                           const ExperimentConfig& config,
                                                           unsigned jobs);

EnsembleMetadata ensemble_metadata(const CompositeProblem& problem, const ExperimentConfig& config);

/// Writes the experiment directory layout: trajectories/, iterates/,
/// noise/, ensemble_summary.csv, metadata.csv, xstar.csv.
void write_ensemble(const std::string& dir, const ExperimentConfig& config,
                    const ReplicationEnsemble& ens);

/// Reads a directory written by write_ensemble. Every file must carry the
/// same config hash; with `expected_hash` set it must match too.
ReplicationEnsemble load_ensemble(const std::string& dir,
                                  const std::optional<std::string>& expected_hash,
                                  std::string* hash_out = nullptr);

struct HashMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommandOptions {
  std::string config_path;
  std::optional<std::string> out;
  unsigned jobs = 0;  // 0: hardware concurrency
};

/// Subcommands. Each returns an exit code and reports errors on `err`.
int cmd_solve(const CommandOptions& opts, std::ostream& err);
int cmd_experiment(const CommandOptions& opts, std::ostream& err);
int cmd_oracle(const CommandOptions& opts, std::ostream& err);
/// `opts.config_path` may be empty; when given its hash must match the
/// ensemble and its [analysis] section supplies diagnostic settings.
int cmd_analyze(const std::string& ensemble_dir, const std::vector<std::string>& diagnostics,
                const CommandOptions& opts, std::ostream& err);

inline const std::vector<std::string>& known_diagnostics() {
  static const std::vector<std::string> names{"rmse",   "ratefit",   "efficiency",
                                              "deltaw", "normality", "samplecomplexity"};
  return names;
}

}  // namespace adanapg

#endif
