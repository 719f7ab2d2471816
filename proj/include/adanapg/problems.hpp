#ifndef ADANAPG_PROBLEMS_HPP
#define ADANAPG_PROBLEMS_HPP

#include <Eigen/Cholesky>

#include <cstdint>
#include <stdexcept>
#include <string>

#include "adanapg/core.hpp"
#include "adanapg/prox.hpp"

namespace adanapg {

/// Base for problems whose h comes from the regularizer catalog.
class RegularizedProblem : public CompositeProblem {
 public:
  const Regularizer& regularizer() const { return regularizer_; }
  double nonsmooth_value(const Vector& x) const override { return regularizer_.value(x); }
  Vector prox(const Vector& x, double step) const override {
    return prox_apply(regularizer_, x, step);
  }

 protected:
  RegularizedProblem(Index dimension, double lipschitz, double strong_convexity,
                     Regularizer regularizer)
      : CompositeProblem(dimension, lipschitz, strong_convexity),
        regularizer_(regularizer) {}

 private:
  Regularizer regularizer_;
};

/// Largest eigenvalue of a symmetric PSD matrix by power iteration, stopping
/// when the Rayleigh quotient changes by less than `tol` (relative).
double power_iteration(const Matrix& m, int max_iterations = 50, double tol = 1e-6);

enum class LipschitzEstimate { power_iteration, exact };

/// (1/N) sum log(1 + exp(-z_i y_i'x)) + (lambda1/2)|x|^2 + lambda2 |x|_1,
/// sampled by drawing one row uniformly. The l2 term belongs to f, the l1
/// term is h.
class LogisticProblem final : public RegularizedProblem {
 public:
  /// `features` is N x d, `labels` in {-1, +1}.
  LogisticProblem(const Matrix& features, const Vector& labels, double lambda1, double lambda2,
                  LipschitzEstimate estimate = LipschitzEstimate::power_iteration);

  Index num_samples() const { return labels_.size(); }
  /// N x d
  Matrix features() const { return features_t_.transpose(); }
  const Vector& labels() const { return labels_; }
  double lambda1() const { return lambda1_; }
  double lambda2() const { return lambda2_; }

  using CompositeProblem::sample_gradient;
  void sample_gradient(const Vector& x, RandomStream& stream,
                       Eigen::Ref<Vector> out) const override;
  bool has_full_gradient() const override { return true; }
  Vector full_gradient(const Vector& x) const override;
  bool has_smooth_value() const override { return true; }
  double smooth_value(const Vector& x) const override;

 private:
  LogisticProblem(const Matrix& features, const Vector& labels, double lambda1, double lambda2,
                  double lipschitz);
  static double lipschitz_of(const Matrix& features, double lambda1, LipschitzEstimate e);

  Matrix features_t_;  // d x N, one example per column
  Vector labels_;
  double lambda1_;
  double lambda2_;
};

/// Features ~ Normal(0, I / sqrt(d)), labels from a planted Gaussian
/// separator with a fraction `label_noise` flipped.
LogisticProblem make_synthetic_logistic(Index dimension, Index num_samples, double lambda1,
                                        double lambda2, std::uint64_t seed,
                                        double label_noise = 0.1);

/// Logistic loss over the generative model itself: every draw is a fresh
/// example y ~ Normal(0, I / sqrt(d)) labelled by a planted separator with
/// label noise. f has no closed form, so neither the exact gradient nor the
/// exact value is exposed.
class LogisticPopulationProblem final : public RegularizedProblem {
 public:
  LogisticPopulationProblem(Index dimension, double lambda1, double lambda2, std::uint64_t seed,
                        double label_noise = 0.1);

  const Vector& separator() const { return separator_; }

  using CompositeProblem::sample_gradient;
  void sample_gradient(const Vector& x, RandomStream& stream,
                       Eigen::Ref<Vector> out) const override;

 private:
  Vector separator_;
  double lambda1_;
  double label_noise_;
  double feature_scale_;
};

/// min E[(l - u'x)^2] + lambda |x|_1 with u ~ Normal(0, R_u),
/// l = u'x_star + v, v ~ Normal(0, sigma_v^2). One draw is 2(u u'x - l u).
class ParamEstimationProblem final : public RegularizedProblem {
 public:
  ParamEstimationProblem(const Matrix& covariance, const Vector& x_star, double sigma_v,
                         double lambda);

  const Matrix& covariance() const { return covariance_; }
  const Vector& planted() const { return planted_; }
  double sigma_v() const { return sigma_v_; }

  using CompositeProblem::sample_gradient;
  void sample_gradient(const Vector& x, RandomStream& stream,
                       Eigen::Ref<Vector> out) const override;
  bool has_full_gradient() const override { return true; }
  /// 2 R_u (x - x_star)
  Vector full_gradient(const Vector& x) const override;
  bool has_smooth_value() const override { return true; }
  /// (x - x_star)' R_u (x - x_star) + sigma_v^2
  double smooth_value(const Vector& x) const override;

 private:
  ParamEstimationProblem(const Matrix& covariance, const Vector& x_star, double sigma_v,
                         double lambda, const Eigen::Vector2d& spectrum);

  Matrix covariance_;
  Matrix chol_;  // lower factor of R_u
  Vector planted_;
  double sigma_v_;
};

/// R_u = Q diag(s) Q' with Q Haar-random and s log-spaced from 1 down to
/// 1/condition_number; x_star ~ Normal(0, I).
ParamEstimationProblem make_param_estimation(Index dimension, double condition_number,
                                             double sigma_v, double lambda, std::uint64_t seed);

/// (1/2)|Qx - b|^2 + lambda |x|_1 with orthogonal Q. Draws add
/// Normal(0, noise^2 I) to the exact gradient; noise = 0 is noise free.
/// The optimum is soft_threshold(Q'b, lambda).
class LassoToyProblem final : public RegularizedProblem {
 public:
  LassoToyProblem(const Matrix& q, const Vector& b, double lambda, double noise = 0.0);

  Vector closed_form_optimum() const;

  using CompositeProblem::sample_gradient;
  void sample_gradient(const Vector& x, RandomStream& stream,
                       Eigen::Ref<Vector> out) const override;
  bool has_full_gradient() const override { return true; }
  Vector full_gradient(const Vector& x) const override;
  bool has_smooth_value() const override { return true; }
  double smooth_value(const Vector& x) const override;

 private:
  Matrix q_;
  Vector b_;
  double lambda_;
  double noise_;
};

LassoToyProblem make_lasso_toy(Index dimension, double lambda, double noise, std::uint64_t seed);

/// Random orthogonal matrix (QR of a Gaussian matrix, signs fixed).
Matrix random_orthogonal(Index dimension, RandomStream& stream);

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class DatasetFormat { csv, svmlight };

/// CSV: optional header, last column the label. svmlight: "label i:v ...",
/// 1-based indices. Labels may be -1/+1 or 0/1 (0 becomes -1).
LogisticProblem load_sparse_dataset(const std::string& path, DatasetFormat format,
                                    double lambda1, double lambda2);

}  // namespace adanapg

#endif
