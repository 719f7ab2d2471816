#include "adanapg/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "adanapg/prox.hpp"

namespace adanapg {
namespace {

// Largest batch any schedule may request.
constexpr double kMaxScheduleSize = 1e12;

void draw_columns(const CompositeProblem& problem, const Vector& y, RandomStream& stream,
                  Matrix& samples, Index from) {
  for (Index j = from; j < samples.cols(); ++j) {
    problem.sample_gradient(y, stream, samples.col(j));
  }
}

}  // namespace

void AdaptiveTestParams::validate() const {
  if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
  if (!(nu > 0.0)) throw std::invalid_argument("nu must be positive");
  if (k_initial < 2) throw std::invalid_argument("k_initial must be at least 2");
  if (k_max < k_initial) throw std::invalid_argument("k_max must be at least k_initial");
  if (max_augment_rounds < 1) throw std::invalid_argument("max_augment_rounds must be >= 1");
  if (!(gmap_floor >= 0.0)) throw std::invalid_argument("gmap_floor must be nonnegative");
}

GradientBatch batch_mean(Matrix samples, const Vector& y, const CompositeProblem& problem,
                         double alpha) {
  if (samples.cols() < 1) throw std::invalid_argument("batch needs at least one sample");
  if (samples.rows() != y.size()) throw DimensionError("batch: sample dimension differs from point");
  GradientBatch batch;
  batch.point = y;
  batch.size = samples.cols();
  batch.mean = samples.rowwise().sum() / static_cast<double>(batch.size);
  batch.samples = std::move(samples);
  batch.gmap = gradient_mapping(problem, y, batch.mean, alpha);
  batch.gmap_norm_sq = batch.gmap.squaredNorm();
  return batch;
}

GradientBatch batch_statistics(Matrix samples, const Vector& y, const CompositeProblem& problem,
                               double alpha) {
  if (samples.cols() < 2) {
    throw std::invalid_argument("batch statistics need at least 2 samples, got " +
                                std::to_string(samples.cols()));
  }
  GradientBatch batch = batch_mean(std::move(samples), y, problem, alpha);
  const double denom = static_cast<double>(batch.size - 1);
  const double mean_norm = batch.mean.norm();
  if (mean_norm > 0.0) {
    const Vector direction = batch.mean / mean_norm;
    const Vector lengths = batch.samples.transpose() * direction;
    batch.v1 = (lengths.array() - mean_norm).square().sum() / denom;
    double residual = 0.0;
    for (Index i = 0; i < batch.size; ++i) {
      residual += (batch.samples.col(i) - lengths(i) * direction).squaredNorm();
    }
    batch.v2 = residual / denom;
  } else {
    batch.v1 = 0.0;
    batch.v2 = batch.samples.colwise().squaredNorm().sum() / denom;
  }
  return batch;
}

bool batch_passes_tests(const GradientBatch& batch, const AdaptiveTestParams& params) {
  const double g = std::max(batch.gmap_norm_sq, params.gmap_floor);
  const double k = static_cast<double>(batch.size);
  return batch.v1 / k <= params.theta * params.theta * g &&
         batch.v2 / k <= params.nu * params.nu * g;
}

Index required_batch_size(const GradientBatch& batch, const AdaptiveTestParams& params) {
  const double g = std::max(batch.gmap_norm_sq, params.gmap_floor);
  const double need = std::max(batch.v1 / (params.theta * params.theta * g),
                               batch.v2 / (params.nu * params.nu * g));
  constexpr double cap = static_cast<double>(std::numeric_limits<Index>::max() / 4);
  if (!(need < cap)) return static_cast<Index>(cap);
  return static_cast<Index>(std::ceil(need));
}

AcquireResult adaptive_acquire(const CompositeProblem& problem, const Vector& y, double alpha,
                               const AdaptiveTestParams& params, Index carry_k,
                               RandomStream& stream) {
  params.validate();
  if (carry_k < params.k_initial || carry_k > params.k_max) {
    throw std::invalid_argument("carry_k outside [k_initial, k_max]");
  }
  Matrix samples(problem.dimension(), carry_k);
  draw_columns(problem, y, stream, samples, 0);

  AcquireResult result;
  int augmentations = 0;
  for (;;) {
    result.batch = batch_statistics(std::move(samples), y, problem, alpha);
    ++result.test_rounds;
    // below the floor the iterate is numerically stationary; keep K
    if (result.batch.gmap_norm_sq < params.gmap_floor) break;
    if (batch_passes_tests(result.batch, params)) break;
    const Index k = result.batch.size;
    if (k >= params.k_max) {
      result.budget_capped = true;
      break;
    }
    if (augmentations == params.max_augment_rounds) break;
    const Index target =
        std::min(params.k_max, std::max(required_batch_size(result.batch, params), k + 1));
    samples = std::move(result.batch.samples);
    samples.conservativeResize(Eigen::NoChange, target);
    draw_columns(problem, y, stream, samples, k);
    ++augmentations;
  }
  result.carry_out = result.batch.size;
  return result;
}

PopulationTestValues population_tests(const GradientBatch& batch, const CompositeProblem& problem,
                                      double alpha, double theta, double nu) {
  const Vector grad = problem.full_gradient(batch.point);
  const Vector gmap = gradient_mapping(problem, batch.point, grad, alpha);
  const double k = static_cast<double>(batch.size);
  const double grad_norm = grad.norm();

  PopulationTestValues out;
  if (grad_norm > 0.0) {
    const Vector direction = grad / grad_norm;
    const Vector lengths = batch.samples.transpose() * direction;
    out.inner_product_lhs = (lengths.array() - grad_norm).square().sum() / (k * k);
    double residual = 0.0;
    for (Index i = 0; i < batch.size; ++i) {
      residual += (batch.samples.col(i) - lengths(i) * direction).squaredNorm();
    }
    out.orthogonality_lhs = residual / (k * k);
  } else {
    out.orthogonality_lhs = batch.samples.colwise().squaredNorm().sum() / (k * k);
  }
  out.inner_product_rhs = theta * theta * gmap.squaredNorm();
  out.orthogonality_rhs = nu * nu * gmap.squaredNorm();
  return out;
}

void SamplingSchedule::validate() const {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, AdaptiveTestParams>) {
          s.validate();
        } else if constexpr (std::is_same_v<T, GeometricSchedule>) {
          if (s.k0 < 1) throw std::invalid_argument("geometric k0 must be >= 1");
          if (!(s.gamma1 > 0.0)) throw std::invalid_argument("gamma1 must be positive");
        } else if constexpr (std::is_same_v<T, PolynomialSchedule>) {
          if (s.k0 < 1) throw std::invalid_argument("polynomial k0 must be >= 1");
          if (!(s.gamma2 > 0.0)) throw std::invalid_argument("gamma2 must be positive");
        } else {
          if (s.k < 1) throw std::invalid_argument("fixed batch size must be >= 1");
        }
      },
      kind);
}

Index schedule_size(const SamplingSchedule& schedule, Index n) {
  if (n < 0) throw std::invalid_argument("schedule index must be nonnegative");
  const double size = std::visit(
      [n](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        const double k = static_cast<double>(n);
        if constexpr (std::is_same_v<T, AdaptiveTestParams>) {
          throw std::invalid_argument("adaptive sampling has no deterministic schedule");
        } else if constexpr (std::is_same_v<T, GeometricSchedule>) {
          return std::ceil(static_cast<double>(s.k0) * std::pow(1.0 + s.gamma1, k));
        } else if constexpr (std::is_same_v<T, PolynomialSchedule>) {
          if (n == 0) return static_cast<double>(s.k0);
          return std::ceil(static_cast<double>(s.k0) * std::pow(k, s.gamma2));
        } else {
          return static_cast<double>(s.k);
        }
      },
      schedule.kind);
  if (!(size <= kMaxScheduleSize)) {
    throw std::overflow_error("schedule size exceeds 1e12 samples at n = " + std::to_string(n));
  }
  return std::max<Index>(1, static_cast<Index>(size));
}

}  // namespace adanapg
