#ifndef ADANAPG_SOLVER_HPP
#define ADANAPG_SOLVER_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "adanapg/core.hpp"
#include "adanapg/sampling.hpp"

namespace adanapg {

enum class Algorithm { adanapg, prox_gradient, accel_prox_gradient, full_gradient_accel };
enum class Mode { general, strongly_convex };

struct SolverOptions {
  Algorithm algorithm = Algorithm::adanapg;
  Mode mode = Mode::strongly_convex;
  Index max_iterations = 100;
  /// Stop once ||G_hat(y_n)|| <= tol. Zero stops only at an exact zero.
  double stop_gmap_tol = 0.0;
  /// pi_0 for general mode.
  double pi0 = 1.0;
  /// theta, nu entering the step size when the schedule is deterministic.
  /// With adaptive sampling the controller's (theta, nu) are used.
  double theta = 0.9;
  double nu = 5.5;
  std::optional<double> alpha_override;
  /// Also stop once Gamma_n reaches this many samples.
  std::optional<std::int64_t> max_samples;
  /// x_0; zero vector when absent.
  std::optional<Vector> initial_point;
  /// Record gradient noise g_hat(y_n) - grad f(y_n); needs the exact gradient.
  bool record_noise = false;
  /// Keep x_n in every record.
  bool record_iterates = false;
  /// Wall-clock timing per iteration. Off by default to keep output
  /// reproducible byte for byte.
  bool record_timing = false;
};

struct SolverState {
  Vector x_curr;
  Vector x_prev;
  Vector y;
  double pi = 1.0;
  double alpha = 0.0;
  double q = 0.0;
  Index n = 0;
  std::int64_t cum_samples = 0;
};

/// Telemetry for iteration n: x_n and the gradient estimate taken at y_n.
struct IterationRecord {
  Index n = 0;
  Index batch_size = 0;
  std::int64_t cum_samples = 0;
  std::optional<double> objective;
  std::optional<double> dist_sq;
  double gmap_norm = 0.0;
  int test_rounds = 0;
  bool budget_capped = false;
  std::optional<std::int64_t> elapsed_ns;
  std::optional<Vector> noise;
  std::optional<Vector> iterate;
};

/// alpha = 1 / (L (theta^2 + nu^2 + 1))
inline double step_size(double lipschitz, double theta, double nu) {
  return 1.0 / (lipschitz * (theta * theta + nu * nu + 1.0));
}

/// rho = 1 - sqrt(mu / (L (theta^2 + nu^2 + 1)))
inline double contraction_rate(double mu, double lipschitz, double theta, double nu) {
  return 1.0 - std::sqrt(mu * step_size(lipschitz, theta, nu));
}

/// Positive root of p^2 - (q - pi^2) p - pi^2 = 0.
template <typename Scalar>
Scalar pi_next(Scalar pi_n, Scalar q) {
  const Scalar b = q - pi_n * pi_n;
  const Scalar c = pi_n * pi_n;
  const Scalar disc = std::sqrt(b * b + Scalar(4) * c);
  // for b < 0 use 2c / (disc - b) to avoid cancelling disc against -b
  if (b >= Scalar(0)) return (b + disc) / Scalar(2);
  return Scalar(2) * c / (disc - b);
}

/// pi_n (1 - pi_n) / (pi_n^2 + pi_{n+1})
template <typename Scalar>
Scalar momentum_coeff(Scalar pi_n, Scalar pi_next_value) {
  return pi_n * (Scalar(1) - pi_n) / (pi_n * pi_n + pi_next_value);
}

/// Runs one solver path and returns records for n = 0, 1, ..., stop.
/// Throws CapabilityError / std::invalid_argument on unmet requirements.
std::vector<IterationRecord> run(const CompositeProblem& problem, const SolverOptions& options,
                                 const SamplingSchedule& schedule, RandomStream& stream);

/// Alpha the solver uses for these options and schedule.
double solver_step_size(const CompositeProblem& problem, const SolverOptions& options,
                        const SamplingSchedule& schedule);

struct OracleResult {
  Vector x;
  double gmap_norm = 0.0;
  Index iterations = 0;
  bool converged = false;
};

/// Accelerated full-gradient solve (step 1/L, gradient-based restart) until
/// ||G_{1/L}(x)|| <= tol. Reports non-convergence instead of throwing.
OracleResult solve_oracle(const CompositeProblem& problem, Index max_iter, double tol,
                          std::optional<Vector> start = std::nullopt);

}  // namespace adanapg

#endif
