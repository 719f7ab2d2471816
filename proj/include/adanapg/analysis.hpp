#ifndef ADANAPG_ANALYSIS_HPP
#define ADANAPG_ANALYSIS_HPP

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "adanapg/core.hpp"
#include "adanapg/solver.hpp"

namespace adanapg {

/// A diagnostic's input requirements are not met (missing x_star, no
/// recorded noise, too few replications, degenerate data).
struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EnsembleMetadata {
  std::optional<Vector> x_star;
  double mu = 0.0;
  double lipschitz = 1.0;
  double theta = 0.9;
  double nu = 5.5;
  /// Step size the runs used.
  double alpha = 0.0;

  double rho() const { return contraction_rate(mu, lipschitz, theta, nu); }
};

/// Trajectories of independent replications, indexed [replication][iteration].
struct ReplicationEnsemble {
  std::vector<std::vector<IterationRecord>> paths;
  EnsembleMetadata meta;

  Index replications() const { return static_cast<Index>(paths.size()); }
  /// Common record count; throws PreconditionError when paths disagree.
  Index length() const;
  /// Shortest record count. Runs stopped early by a tolerance or sample
  /// budget differ in length.
  Index common_length() const;
};

struct CurvePoint {
  Index n = 0;
  double value = 0.0;
};

/// RMSE_n = sqrt(mean_j |x_n^(j) - x_star|^2)
std::vector<CurvePoint> rmse_curve(const ReplicationEnsemble& ens);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  /// (1/2) ln rho
  double theoretical_slope = 0.0;
};

/// Ordinary least squares of ln(value) on n over n_lo <= n <= n_hi.
RateFit rate_fit(std::span<const CurvePoint> curve, Index n_lo, Index n_hi, double rho);

/// W_n = rho^{-n} mean_j w_n w_n' from recorded gradient noise.
Matrix rescaled_noise_covariance(const ReplicationEnsemble& ens, double rho, Index n);

/// Delta W_n = |W_{n+1} - W_n|_F for n = 0 .. length - 2.
std::vector<CurvePoint> covariance_gap_curve(const ReplicationEnsemble& ens, double rho);

struct ComponentMoments {
  Index component = 0;
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  bool skewness_ok = false;
  bool kurtosis_ok = false;
  bool pass() const { return skewness_ok && kurtosis_ok; }
};

struct NormalityReport {
  Index n_terminal = 0;
  Index replications = 0;
  double skewness_threshold = 0.0;  // 4 sqrt(6 / M)
  double kurtosis_threshold = 0.0;  // 4 sqrt(24 / M)
  std::vector<ComponentMoments> components;
  /// Covariance of the scaled stacked error (x_n - x*, x_{n-1} - x*).
  Matrix covariance;
  double min_eigenvalue = 0.0;
  Index passing() const;
};

/// Minimum number of replications the normality diagnostic accepts.
inline constexpr Index kMinNormalityReplications = 200;

/// Scaled stacked errors alpha^{-1} rho^{-n/2} (x_n - x*, x_{n-1} - x*),
/// one column per replication (2d x M). Needs recorded iterates and x*.
Matrix scaled_errors(const ReplicationEnsemble& ens, Index n);

/// Moment-based normality flags on the requested components of the scaled
/// stacked error (indices in [0, 2d)). Requires M >= 200.
NormalityReport normality_report(const ReplicationEnsemble& ens, Index n_terminal,
                                 std::span<const Index> components);

/// Moment flags for raw draws, one value per replication.
ComponentMoments moment_flags(std::span<const double> values);

/// Sample covariance (divisor M) of the columns of `samples`.
Matrix sample_covariance(const Matrix& samples);

/// |Sigma_b - Sigma_a|_F / |Sigma_b|_F for the scaled error covariance.
double covariance_stabilization_gap(const ReplicationEnsemble& ens, Index n_a, Index n_b);

struct EfficiencyPoint {
  Index n = 0;
  double mean_cum_samples = 0.0;
  double mean_objective = 0.0;
};

/// Over the iterations every replication reached.
std::vector<EfficiencyPoint> efficiency_curve(const ReplicationEnsemble& ens);

/// Per iteration median over replications of Gamma_n |x_n - x*|^2.
std::vector<CurvePoint> sample_complexity_check(const ReplicationEnsemble& ens);

struct SummaryRow {
  Index n = 0;
  std::optional<double> mean_objective;
  std::optional<double> median_objective;
  std::optional<double> rmse;
  double mean_cum_samples = 0.0;
  double mean_batch_size = 0.0;
};

/// Over the iterations every replication reached.
std::vector<SummaryRow> ensemble_summary(const ReplicationEnsemble& ens);

/// Equal-width bin counts over [min, max] of `values`.
struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<Index> counts;
};
Histogram histogram(std::span<const double> values, Index bins);

double median(std::vector<double> values);

}  // namespace adanapg

#endif
