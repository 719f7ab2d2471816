#include "adanapg/solver.hpp"

#include <chrono>
#include <stdexcept>

#include "adanapg/prox.hpp"

namespace adanapg {
namespace {

bool accelerated(Algorithm a) { return a != Algorithm::prox_gradient; }

void validate(const CompositeProblem& problem, const SolverOptions& options,
              const SamplingSchedule& schedule) {
  if (options.max_iterations < 0) throw std::invalid_argument("max_iterations must be >= 0");
  if (!(options.stop_gmap_tol >= 0.0)) throw std::invalid_argument("stop_gmap_tol must be >= 0");
  if (options.alpha_override && !(*options.alpha_override > 0.0)) {
    throw std::invalid_argument("alpha_override must be positive");
  }
  if (options.mode == Mode::strongly_convex && !(problem.strong_convexity() > 0.0)) {
    throw std::invalid_argument("strongly_convex mode requires mu > 0");
  }
  if (options.mode == Mode::general && !(options.pi0 > 0.0 && options.pi0 <= 1.0)) {
    throw std::invalid_argument("pi0 must lie in (0, 1]");
  }
  if (options.algorithm == Algorithm::full_gradient_accel && !problem.has_full_gradient()) {
    throw CapabilityError("full_gradient_accel needs the exact gradient");
  }
  if (options.record_noise && !problem.has_full_gradient()) {
    throw CapabilityError("noise recording needs the exact gradient");
  }
  if (options.algorithm == Algorithm::adanapg && !schedule.is_adaptive()) {
    throw std::invalid_argument("adanapg needs adaptive sampling");
  }
  if (options.max_samples && *options.max_samples < 1) {
    throw std::invalid_argument("max_samples must be >= 1");
  }
  if (options.initial_point && options.initial_point->size() != problem.dimension()) {
    throw DimensionError("initial point dimension differs from problem dimension");
  }
  if (options.algorithm != Algorithm::full_gradient_accel) schedule.validate();
}

}  // namespace

double solver_step_size(const CompositeProblem& problem, const SolverOptions& options,
                        const SamplingSchedule& schedule) {
  if (options.alpha_override) return *options.alpha_override;
  if (options.algorithm != Algorithm::full_gradient_accel && schedule.is_adaptive()) {
    const auto& p = schedule.adaptive();
    return step_size(problem.lipschitz(), p.theta, p.nu);
  }
  return step_size(problem.lipschitz(), options.theta, options.nu);
}

std::vector<IterationRecord> run(const CompositeProblem& problem, const SolverOptions& options,
                                 const SamplingSchedule& schedule, RandomStream& stream) {
  validate(problem, options, schedule);
  using Clock = std::chrono::steady_clock;

  const Index d = problem.dimension();
  SolverState state;
  state.alpha = solver_step_size(problem, options, schedule);
  state.q = problem.strong_convexity() * state.alpha;
  if (!(state.q < 1.0)) throw std::invalid_argument("mu * alpha must be below 1");
  state.x_curr = options.initial_point.value_or(Vector::Zero(d));
  state.x_prev = state.x_curr;
  state.y = state.x_curr;
  state.pi = options.mode == Mode::strongly_convex ? std::sqrt(state.q) : options.pi0;
  const double beta = (1.0 - std::sqrt(state.q)) / (1.0 + std::sqrt(state.q));

  Index carry = schedule.is_adaptive() ? schedule.adaptive().k_initial : 0;
  const auto& x_star = problem.known_optimum();

  std::vector<IterationRecord> records;
  records.reserve(static_cast<std::size_t>(options.max_iterations) + 1);
  auto started = Clock::now();

  for (;;) {
    IterationRecord rec;
    rec.n = state.n;

    Vector grad;
    Vector gmap;
    if (options.algorithm == Algorithm::full_gradient_accel) {
      grad = problem.full_gradient(state.y);
      gmap = gradient_mapping(problem, state.y, grad, state.alpha);
      rec.test_rounds = 0;
    } else if (schedule.is_adaptive()) {
      AcquireResult acquired =
          adaptive_acquire(problem, state.y, state.alpha, schedule.adaptive(), carry, stream);
      carry = acquired.carry_out;
      rec.batch_size = acquired.batch.size;
      rec.test_rounds = acquired.test_rounds;
      rec.budget_capped = acquired.budget_capped;
      grad = std::move(acquired.batch.mean);
      gmap = std::move(acquired.batch.gmap);
    } else {
      const Index k = schedule_size(schedule, state.n);
      Matrix samples(d, k);
      for (Index j = 0; j < k; ++j) problem.sample_gradient(state.y, stream, samples.col(j));
      GradientBatch batch = batch_mean(std::move(samples), state.y, problem, state.alpha);
      rec.batch_size = k;
      grad = std::move(batch.mean);
      gmap = std::move(batch.gmap);
    }
    require_finite(grad, "gradient estimate");

    state.cum_samples += rec.batch_size;
    rec.cum_samples = state.cum_samples;
    rec.gmap_norm = gmap.norm();
    if (problem.has_smooth_value()) rec.objective = problem.objective(state.x_curr);
    if (x_star) rec.dist_sq = (state.x_curr - *x_star).squaredNorm();
    if (options.record_noise) rec.noise = grad - problem.full_gradient(state.y);
    if (options.record_iterates) rec.iterate = state.x_curr;
    if (options.record_timing) {
      const auto now = Clock::now();
      rec.elapsed_ns =
          std::chrono::duration_cast<std::chrono::nanoseconds>(now - started).count();
      started = now;
    }
    records.push_back(std::move(rec));

    if (state.n >= options.max_iterations || records.back().gmap_norm <= options.stop_gmap_tol ||
        (options.max_samples && state.cum_samples >= *options.max_samples)) {
      break;
    }

    Vector x_next = problem.prox(state.y - state.alpha * grad, state.alpha);
    require_finite(x_next, "iterate");

    double momentum = 0.0;
    double pi_following = state.pi;
    if (accelerated(options.algorithm)) {
      if (options.mode == Mode::strongly_convex) {
        momentum = beta;
      } else {
        pi_following = pi_next(state.pi, state.q);
        momentum = momentum_coeff(state.pi, pi_following);
      }
    }
    state.y = x_next + momentum * (x_next - state.x_curr);
    state.x_prev = std::move(state.x_curr);
    state.x_curr = std::move(x_next);
    state.pi = pi_following;
    ++state.n;
  }
  return records;
}

OracleResult solve_oracle(const CompositeProblem& problem, Index max_iter, double tol,
                          std::optional<Vector> start) {
  if (!problem.has_full_gradient()) throw CapabilityError("oracle solve needs the exact gradient");
  if (start && start->size() != problem.dimension()) {
    throw DimensionError("oracle start dimension differs from problem dimension");
  }
  const double alpha = 1.0 / problem.lipschitz();
  const double q = problem.strong_convexity() * alpha;

  OracleResult out;
  Vector x = start.value_or(Vector::Zero(problem.dimension()));
  Vector y = x;
  double t = 1.0;
  for (Index it = 0;; ++it) {
    const Vector gx = problem.full_gradient(x);
    out.gmap_norm = gradient_mapping(problem, x, gx, alpha).norm();
    out.iterations = it;
    if (out.gmap_norm <= tol) {
      out.converged = true;
      break;
    }
    if (it >= max_iter) break;

    const Vector gy = problem.full_gradient(y);
    const Vector x_next = problem.prox(y - alpha * gy, alpha);
    double momentum;
    if (q > 0.0) {
      momentum = (1.0 - std::sqrt(q)) / (1.0 + std::sqrt(q));
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      momentum = (t - 1.0) / t_next;
      t = t_next;
    }
    // gradient restart: drop momentum when the step opposes it
    if ((y - x_next).dot(x_next - x) > 0.0) {
      momentum = 0.0;
      t = 1.0;
    }
    y = x_next + momentum * (x_next - x);
    x = x_next;
  }
  out.x = std::move(x);
  return out;
}

}  // namespace adanapg
