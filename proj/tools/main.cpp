#include <CLI11.hpp>

#include <iostream>

#include "adanapg/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Adaptive-sampling accelerated proximal gradient toolkit"};
  app.require_subcommand(1);

  adanapg::CommandOptions opts;
  std::string dir;
  std::vector<std::string> diagnostics;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", opts.config_path, "Experiment config file");
    if (config_required) c->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out, "Output directory (overrides output.directory)");
  };

  auto* solve = app.add_subcommand("solve", "Run one solver path, write trajectory.csv");
  add_common(solve, true);

  auto* experiment = app.add_subcommand("experiment", "Run all replications of a config");
  add_common(experiment, true);
  experiment->add_option("--jobs", opts.jobs, "Worker threads (default: all cores)");

  auto* oracle = app.add_subcommand("oracle", "Full-gradient solve, write xstar.csv");
  add_common(oracle, true);

  auto* analyze = app.add_subcommand("analyze", "Diagnostics over an experiment directory");
  analyze->add_option("dir", dir, "Experiment directory")->required()->check(CLI::ExistingDirectory);
  add_common(analyze, false);
  analyze->add_option("--diagnostics", diagnostics,
                      "Comma-separated subset of rmse,ratefit,efficiency,deltaw,normality,"
                      "samplecomplexity")
      ->delimiter(',')
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : adanapg::kExitConfig;
  }

  try {
    if (*solve) return adanapg::cmd_solve(opts, std::cerr);
    if (*experiment) return adanapg::cmd_experiment(opts, std::cerr);
    if (*oracle) return adanapg::cmd_oracle(opts, std::cerr);
    return adanapg::cmd_analyze(dir, diagnostics, opts, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return adanapg::kExitSolver;
  }
}
