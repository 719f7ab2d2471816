#ifndef ADANAPG_SAMPLING_HPP
#define ADANAPG_SAMPLING_HPP

#include <variant>

#include "adanapg/core.hpp"

namespace adanapg {

/// Parameters of the adaptive batch-size controller.
struct AdaptiveTestParams {
  double theta = 0.9;
  double nu = 5.5;
  Index k_initial = 2;
  Index k_max = 1'000'000;
  int max_augment_rounds = 10;
  /// Floor on ||G_hat||^2 in the test denominators.
  double gmap_floor = 1e-16;

  void validate() const;
};

/// A batch of gradient draws at one point together with its test statistics.
struct GradientBatch {
  Vector point;
  /// d x K, one draw per column, in draw order.
  Matrix samples;
  Vector mean;
  /// Sample gradient mapping at `point` built from `mean`.
  Vector gmap;
  Index size = 0;
  /// Sample variance of the projection lengths g_i' m / |m| around |m|.
  double v1 = 0.0;
  /// Sample mean-squared residual of g_i orthogonal to m.
  double v2 = 0.0;
  double gmap_norm_sq = 0.0;
};

/// Computes mean, sample gradient mapping and the (v1, v2) statistics.
/// Throws std::invalid_argument for fewer than two samples.
GradientBatch batch_statistics(Matrix samples, const Vector& y, const CompositeProblem& problem,
                               double alpha);

/// Mean and sample gradient mapping only; accepts K = 1 (v1 = v2 = 0).
GradientBatch batch_mean(Matrix samples, const Vector& y, const CompositeProblem& problem,
                         double alpha);

/// Sample-statistic version of the inner-product and orthogonality tests.
bool batch_passes_tests(const GradientBatch& batch, const AdaptiveTestParams& params);

/// Sample size the tests ask for, ceil(max(v1 / (theta^2 g), v2 / (nu^2 g))).
Index required_batch_size(const GradientBatch& batch, const AdaptiveTestParams& params);

struct AcquireResult {
  GradientBatch batch;
  Index carry_out = 0;
  /// Number of test evaluations (1 + augmentations).
  int test_rounds = 0;
  /// k_max was reached with the tests still failing.
  bool budget_capped = false;
};

/// Draws carry_k samples at y and grows the batch until both tests pass,
/// k_max is reached or max_augment_rounds augmentations have been made.
/// Existing draws are always kept; new draws are appended.
AcquireResult adaptive_acquire(const CompositeProblem& problem, const Vector& y, double alpha,
                               const AdaptiveTestParams& params, Index carry_k,
                               RandomStream& stream);

/// Population form of the two tests for problems with a known gradient.
/// Left sides are the conditional variances of the batch mean, estimated from
/// the draws around the exact gradient; right sides use the exact gradient
/// mapping.
struct PopulationTestValues {
  double inner_product_lhs = 0.0;
  double orthogonality_lhs = 0.0;
  double inner_product_rhs = 0.0;
  double orthogonality_rhs = 0.0;
  bool passes() const {
    return inner_product_lhs <= inner_product_rhs && orthogonality_lhs <= orthogonality_rhs;
  }
};

PopulationTestValues population_tests(const GradientBatch& batch, const CompositeProblem& problem,
                                      double alpha, double theta, double nu);

struct GeometricSchedule {
  Index k0 = 2;
  double gamma1 = 0.05;
};
struct PolynomialSchedule {
  Index k0 = 2;
  double gamma2 = 0.01;
};
struct FixedSchedule {
  Index k = 1;
};

/// Batch-size policy: adaptive controller or a deterministic schedule.
struct SamplingSchedule {
  std::variant<AdaptiveTestParams, GeometricSchedule, PolynomialSchedule, FixedSchedule> kind;

  bool is_adaptive() const { return std::holds_alternative<AdaptiveTestParams>(kind); }
  const AdaptiveTestParams& adaptive() const { return std::get<AdaptiveTestParams>(kind); }
  void validate() const;
};

/// K_n for deterministic schedules: GEOM ceil(k0 (1 + gamma1)^n),
/// POLY ceil(k0 n^gamma2) with n = 0 mapped to k0, fixed k.
Index schedule_size(const SamplingSchedule& schedule, Index n);

}  // namespace adanapg

#endif
