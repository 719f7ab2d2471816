// Acceptance harness: one PASS/FAIL line per criterion.
#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include "adanapg/analysis.hpp"
#include "adanapg/experiment.hpp"
#include "adanapg/problems.hpp"
#include "adanapg/prox.hpp"
#include "adanapg/solver.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace adanapg;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  double budget_seconds;  // 0: no runtime bound
  std::function<Outcome(unsigned)> check;
};

ReplicationEnsemble run_ensemble(const ExperimentConfig& config, unsigned jobs,
                                 std::unique_ptr<CompositeProblem>* keep = nullptr) {
  auto problem = build_problem(config);
  resolve_optimum(*problem, config);
  ReplicationEnsemble ens{run_replications(*problem, config, jobs), ensemble_metadata(*problem, config)};
  if (keep) *keep = std::move(problem);
  return ens;
}

ExperimentConfig logistic_config(double lambda1, Index replications) {
  ExperimentConfig c;
  c.problem.kind = ProblemKind::logistic_synthetic;
  c.problem.dimension = 20;
  c.problem.num_samples = 200;
  c.problem.lambda1 = lambda1;
  c.problem.lambda2 = 1.0 / 200.0;
  c.solver.algorithm = Algorithm::adanapg;
  c.solver.mode = lambda1 > 0.0 ? Mode::strongly_convex : Mode::general;
  c.solver.max_iterations = 300;
  c.sampling.theta = 0.9;
  c.sampling.nu = 5.5;
  c.sampling.k_max = 10'000;
  c.experiment.replications = replications;
  c.experiment.record_iterates = false;
  return c;
}

ExperimentConfig param_config(Index d, double cond, Index replications) {
  ExperimentConfig c;
  c.problem.kind = ProblemKind::param_estimation;
  c.problem.dimension = d;
  c.problem.condition_number = cond;
  c.problem.sigma_v = 1e-3;
  c.solver.max_iterations = 200;
  c.sampling.theta = 1.2;
  c.sampling.nu = 1.4;
  c.sampling.k_max = 10'000;
  c.experiment.replications = replications;
  c.experiment.record_iterates = true;
  return c;
}

// Mean over replications of F(x_n) - F* per iteration.
std::vector<double> mean_gap(const ReplicationEnsemble& ens, double f_star) {
  std::vector<double> out(static_cast<std::size_t>(ens.length()), 0.0);
  for (const auto& path : ens.paths) {
    for (std::size_t n = 0; n < out.size(); ++n) out[n] += *path[n].objective - f_star;
  }
  for (auto& v : out) v /= static_cast<double>(ens.replications());
  return out;
}

Outcome strongly_convex_envelope(unsigned jobs) {
  const ExperimentConfig c = logistic_config(1.0 / 200.0, 100);
  std::unique_ptr<CompositeProblem> p;
  const ReplicationEnsemble ens = run_ensemble(c, jobs, &p);
  const Vector& x_star = *p->known_optimum();
  const double f_star = p->objective(x_star);
  const double mu = p->strong_convexity();
  const double rho = ens.meta.rho();
  const Vector x0 = Vector::Zero(p->dimension());
  const double c2 = 2.0 / mu * (p->objective(x0) - f_star + 0.5 * mu * (x0 - x_star).squaredNorm());
  const auto gap = mean_gap(ens, f_star);
  double worst = 0.0;
  bool ok = true;
  for (std::size_t n = 0; n < gap.size(); ++n) {
    const double bound = c2 * std::pow(rho, static_cast<double>(n));
    ok = ok && gap[n] <= bound;
    worst = std::max(worst, gap[n] / bound);
  }
  return {ok, fmt::format("max mean gap / (C2 rho^n) = {:.3e} over n <= {}, rho = {:.5f}, C2 = {:.4g}",
                          worst, gap.size() - 1, rho, c2)};
}

Outcome convex_envelope(unsigned jobs) {
  const ExperimentConfig c = logistic_config(0.0, 100);
  std::unique_ptr<CompositeProblem> p;
  const ReplicationEnsemble ens = run_ensemble(c, jobs, &p);
  const Vector& x_star = *p->known_optimum();
  const double f_star = p->objective(x_star);
  const Vector x0 = Vector::Zero(p->dimension());
  const double c1 = p->objective(x0) - f_star + 0.5 * p->lipschitz() * (x0 - x_star).squaredNorm();
  const double s = c.sampling.theta * c.sampling.theta + c.sampling.nu * c.sampling.nu + 1.0;
  const auto gap = mean_gap(ens, f_star);
  double worst = 0.0;
  bool ok = true;
  for (std::size_t n = 0; n < gap.size(); ++n) {
    const double bound = 4.0 * s * c1 / std::pow(2.0 * std::sqrt(s) + static_cast<double>(n), 2);
    ok = ok && gap[n] <= bound;
    worst = std::max(worst, gap[n] / bound);
  }
  return {ok, fmt::format("max mean gap / envelope = {:.3e} over n <= {}, C1 = {:.4g}", worst,
                          gap.size() - 1, c1)};
}

Outcome sample_complexity(unsigned jobs) {
  ExperimentConfig c = param_config(10, 100.0, 100);
  c.experiment.record_iterates = false;
  const auto curve = sample_complexity_check(run_ensemble(c, jobs));
  const double at50 = curve.at(50).value;
  double worst = 0.0;
  for (Index n = 50; n <= 200; ++n) worst = std::max(worst, curve.at(static_cast<std::size_t>(n)).value);
  return {worst <= 10.0 * at50,
          fmt::format("max median Gamma_n |x_n - x*|^2 on [50, 200] = {:.4g}, value at 50 = {:.4g}, "
                      "ratio {:.3f} (limit 10)",
                      worst, at50, worst / at50)};
}

Outcome rmse_slope(unsigned jobs) {
  ExperimentConfig c = param_config(2, 600.0, 200);
  c.experiment.record_iterates = false;
  const ReplicationEnsemble ens = run_ensemble(c, jobs);
  const auto curve = rmse_curve(ens);
  const RateFit fit = rate_fit(curve, 0, 200, ens.meta.rho());
  const double ratio = fit.slope / fit.theoretical_slope;
  return {std::abs(ratio - 1.0) <= 0.25 && fit.r_squared >= 0.9,
          fmt::format("slope {:.5f} vs (1/2) ln rho {:.5f}, ratio {:.3f} (limit 1 +- 0.25), r^2 {:.3f} "
                      "(limit 0.9)",
                      fit.slope, fit.theoretical_slope, ratio, fit.r_squared)};
}

Outcome normality(unsigned jobs) {
  const ExperimentConfig c = param_config(2, 600.0, 500);
  const ReplicationEnsemble ens = run_ensemble(c, jobs);
  const std::vector<Index> comps{0, 1, 2, 3};
  const NormalityReport rep = normality_report(ens, 200, comps);
  const double gap = covariance_stabilization_gap(ens, 175, 200);
  std::string moments;
  for (const auto& m : rep.components) {
    moments += fmt::format(" [skew {:.2f} exkurt {:.2f}]", m.skewness, m.excess_kurtosis);
  }
  const bool ok = rep.passing() >= 3 && rep.min_eigenvalue >= -1e-10 && gap <= 0.20;
  return {ok, fmt::format("{} of 4 components pass (|skew| <= {:.3f}, |exkurt| <= {:.3f}):{}; "
                          "min eigenvalue {:.3e}; gap(175, 200) {:.3f} (limit 0.20)",
                          rep.passing(), rep.skewness_threshold, rep.kurtosis_threshold, moments,
                          rep.min_eigenvalue, gap)};
}

Outcome covariance_gap(unsigned jobs) {
  ExperimentConfig c = param_config(10, 100.0, 20);
  c.experiment.record_noise = true;
  c.experiment.record_iterates = false;
  const ReplicationEnsemble ens = run_ensemble(c, jobs);
  const auto gaps = covariance_gap_curve(ens, ens.meta.rho());
  double head = 0.0, tail = 0.0;
  for (std::size_t n = 0; n < 10; ++n) head = std::max(head, gaps.at(n).value);
  for (std::size_t n = gaps.size() - 20; n < gaps.size(); ++n) tail += gaps[n].value / 20.0;
  return {head >= 100.0 * tail,
          fmt::format("max over first 10 = {:.4g}, mean over last 20 = {:.4g}, drop {:.3g}x (limit 100x)",
                      head, tail, head / tail)};
}

Outcome efficiency(unsigned jobs) {
  ExperimentConfig ada = logistic_config(1.0 / 200.0, 20);
  ada.solver.max_iterations = 1'000'000;
  ada.solver.max_samples = 100'000;
  ExperimentConfig geom = ada;
  geom.solver.algorithm = Algorithm::accel_prox_gradient;
  geom.sampling.strategy = SamplingStrategy::geometric;
  geom.sampling.k0 = 2;
  geom.sampling.gamma1 = 0.05;
  auto finals = [&](const ExperimentConfig& c) {
    const ReplicationEnsemble ens = run_ensemble(c, jobs);
    std::vector<double> out;
    for (const auto& path : ens.paths) out.push_back(*path.back().objective);
    return out;
  };
  const auto a = finals(ada);
  const auto g = finals(geom);
  int wins = 0;
  for (std::size_t j = 0; j < a.size(); ++j) wins += a[j] <= g[j] ? 1 : 0;
  const double ma = median(a), mg = median(g);
  return {ma <= mg, fmt::format("median final objective adaNAPG {:.10g} vs GEOM {:.10g} at 1e5 samples; "
                                "adaNAPG ahead in {}/20 pairs",
                                ma, mg, wins)};
}

Outcome exactness(unsigned) {
  std::vector<std::string> failures;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };
  RandomStream s = RandomStream::derive(8, 0);

  double prox_err = 0.0;
  for (const auto& reg : testkit::catalog()) {
    for (int t = 0; t < 50; ++t) {
      const Vector x = testkit::random_vector(3, s, 3.0);
      const double step = 0.05 + 2.0 * s.uniform();
      prox_err = std::max(prox_err, (prox_apply(reg, x, step) - testkit::numeric_prox(reg, x, step))
                                        .cwiseAbs()
                                        .maxCoeff());
    }
  }
  expect(prox_err <= 1e-6, fmt::format("prox vs numeric {:.2e}", prox_err));

  const LassoToyProblem lasso = make_lasso_toy(8, 0.3, 0.0, 5);
  const Vector x_star = lasso.closed_form_optimum();
  double gmap_at_opt = 0.0;
  for (double scale : {1.0, 0.1}) {
    gmap_at_opt = std::max(gmap_at_opt, gradient_mapping(lasso, x_star, lasso.full_gradient(x_star),
                                                         scale / lasso.lipschitz())
                                            .norm());
  }
  expect(gmap_at_opt <= 1e-8, fmt::format("gradient mapping at optimum {:.2e}", gmap_at_opt));

  double expand = 0.0, domination = 0.0;
  for (const auto& reg : testkit::catalog()) {
    const testkit::NoisyQuadratic q(Matrix::Identity(4, 4), Vector::Zero(4), reg);
    for (int t = 0; t < 1000; ++t) {
      const Vector x = testkit::random_vector(4, s, 2.0), y = testkit::random_vector(4, s, 2.0);
      const double step = 0.01 + s.uniform();
      expand = std::max(expand, (prox_apply(reg, x, step) - prox_apply(reg, y, step)).norm() - (x - y).norm());
      const Vector g = testkit::random_vector(4, s), delta = testkit::random_vector(4, s, 0.5);
      domination = std::max(domination, (gradient_mapping(q, x, Vector(g + delta), step) -
                                         gradient_mapping(q, x, g, step))
                                                .norm() -
                                            delta.norm());
    }
  }
  expect(expand <= 1e-12, fmt::format("prox expansion {:.2e}", expand));
  expect(domination <= 1e-12, fmt::format("gradient-mapping error excess {:.2e}", domination));

  double pi_err = 0.0;
  for (double q : {1e-6, 1e-3, 0.04, 0.25}) {
    double pi = std::sqrt(q);
    for (int i = 0; i < 100; ++i) pi = pi_next(pi, q);
    pi_err = std::max(pi_err, std::abs(pi - std::sqrt(q)));
  }
  expect(pi_err <= 1e-14, fmt::format("pi fixed point {:.2e}", pi_err));

  // noise-free adaNAPG against x+ = prox(y - a grad), y+ = x+ + b (x+ - x)
  const LassoToyProblem toy = make_lasso_toy(6, 0.2, 0.0, 6);
  SolverOptions opt;
  opt.max_iterations = 80;
  opt.record_iterates = true;
  opt.initial_point = Vector::Constant(6, 3.0);
  AdaptiveTestParams params;
  RandomStream rs = RandomStream::derive(1, 0);
  const auto recs = run(toy, opt, SamplingSchedule{params}, rs);
  const double alpha = step_size(toy.lipschitz(), params.theta, params.nu);
  const double sq = std::sqrt(toy.strong_convexity() * alpha);
  const double beta = (1 - sq) / (1 + sq);
  Vector x = *opt.initial_point, y = x;
  double recursion_err = 0.0;
  for (const auto& r : recs) {
    recursion_err = std::max(recursion_err, (*r.iterate - x).cwiseAbs().maxCoeff());
    const Vector z = y - alpha * toy.full_gradient(y);
    const Vector next = z.cwiseSign().cwiseProduct((z.cwiseAbs().array() - 0.2 * alpha).max(0.0).matrix());
    y = next + beta * (next - x);
    x = next;
  }
  expect(recs.size() == 81 && recursion_err <= 1e-10,
         fmt::format("reference recursion {:.2e} over {} records", recursion_err, recs.size()));

  const OracleResult oracle = solve_oracle(lasso, 100'000, 1e-12);
  const double oracle_err = (oracle.x - x_star).cwiseAbs().maxCoeff();
  expect(oracle.converged && oracle_err <= 1e-8, fmt::format("oracle vs closed form {:.2e}", oracle_err));

  std::string detail = fmt::format(
      "prox {:.1e}, gmap at x* {:.1e}, expansion {:.1e}, domination {:.1e}, pi {:.1e}, recursion {:.1e}, "
      "oracle {:.1e}",
      prox_err, gmap_at_opt, expand, domination, pi_err, recursion_err, oracle_err);
  for (const auto& f : failures) detail += "; FAILED " + f;
  return {failures.empty(), detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Relative path -> bytes for every regular file below `root`.
std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return out;
}

Outcome determinism(unsigned jobs) {
  const fs::path root = fs::temp_directory_path() / "adanapg_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string solve_cfg = (root / "solve.ini").string();
  std::ofstream(solve_cfg) << "[problem]\nkind = logistic_synthetic\ndimension = 5\nN = 50\n"
                              "lambda1 = 0.02\nlambda2 = 0.02\n[solver]\nmax_iterations = 60\n"
                              "[sampling]\nk_max = 5000\n";
  const std::string exp_cfg = (root / "experiment.ini").string();
  std::ofstream(exp_cfg) << "[problem]\nkind = param_estimation\ndimension = 3\ncondition_number = 50\n"
                            "sigma_v = 0.01\n[solver]\nmax_iterations = 80\n[sampling]\ntheta = 1.2\n"
                            "nu = 1.4\nk_max = 5000\n[experiment]\nreplications = 6\nrecord_noise = true\n";
  std::ostringstream err;
  int status = 0;
  for (const char* run : {"a", "b"}) {
    status |= cmd_solve({solve_cfg, (root / "solve" / run).string(), 1}, err);
    // second experiment run uses a different worker count on purpose
    status |= cmd_experiment({exp_cfg, (root / "experiment" / run).string(), run[0] == 'a' ? 1u : jobs + 1}, err);
  }
  if (status != 0) return {false, "command failed: " + err.str()};
  std::size_t files = 0;
  bool same = true;
  for (const char* kind : {"solve", "experiment"}) {
    const auto a = tree(root / kind / "a");
    const auto b = tree(root / kind / "b");
    same = same && a == b;
    files += a.size();
  }
  fs::remove_all(root);
  return {same && files > 0, fmt::format("{} CSV files compared byte for byte across reruns: {}", files,
                                         same ? "identical" : "DIFFERENT")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> selected;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--criterion", selected, "criteria to run (default: all)")->check(CLI::Range(1, 9));
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "strongly convex envelope", 120, strongly_convex_envelope},
      {2, "convex envelope", 120, convex_envelope},
      {3, "sample complexity", 120, sample_complexity},
      {4, "geometric RMSE slope", 60, rmse_slope},
      {5, "CLT normality", 180, normality},
      {6, "covariance gap diagnostic", 120, covariance_gap},
      {7, "sample efficiency", 120, efficiency},
      {8, "exactness oracles", 30, exactness},
      {9, "determinism", 0, determinism},
  };

  bool all = true;
  for (const auto& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.check(jobs);
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.budget_seconds == 0 || secs <= c.budget_seconds;
    const bool pass = out.pass && in_time;
    all = all && pass;
    std::cout << fmt::format("criterion {} {}: {} | {} | {:.1f} s{}\n", c.id, pass ? "PASS" : "FAIL", c.title,
                             out.detail, secs,
                             in_time ? "" : fmt::format(" (over the {:.0f} s budget)", c.budget_seconds))
              << std::flush;
  }
  return all ? 0 : 1;
}
