#include "adanapg/problems.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace adanapg {
namespace {

// softplus(t) = log(1 + exp(t)) without overflow
double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

// 1 / (1 + exp(t))
double logistic_weight(double t) {
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

Eigen::Vector2d extreme_eigenvalues(const Matrix& covariance) {
  if (covariance.rows() != covariance.cols() || covariance.rows() == 0) {
    throw DimensionError("covariance must be a nonempty square matrix");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(covariance, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("eigenvalue computation failed");
  return {eig.eigenvalues().minCoeff(), eig.eigenvalues().maxCoeff()};
}

void check_labels(const Vector& labels) {
  for (Index i = 0; i < labels.size(); ++i) {
    if (labels(i) != 1.0 && labels(i) != -1.0) {
      throw std::invalid_argument("labels must be -1 or +1");
    }
  }
}

}  // namespace

double power_iteration(const Matrix& m, int max_iterations, double tol) {
  if (m.rows() != m.cols() || m.rows() == 0) throw DimensionError("power iteration: square matrix required");
  Vector v = Vector::Constant(m.rows(), 1.0 / std::sqrt(static_cast<double>(m.rows())));
  double estimate = v.dot(m * v);
  for (int it = 0; it < max_iterations; ++it) {
    Vector w = m * v;
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;
    v = w / wn;
    const double next = v.dot(m * v);
    const bool done = std::abs(next - estimate) <= tol * std::abs(next);
    estimate = next;
    if (done) break;
  }
  return estimate;
}

// --- logistic ---------------------------------------------------------------

double LogisticProblem::lipschitz_of(const Matrix& features, double lambda1, LipschitzEstimate e) {
  if (features.rows() == 0) throw std::invalid_argument("empty dataset");
  const Matrix gram = features.transpose() * features / static_cast<double>(features.rows());
  double top;
  if (e == LipschitzEstimate::exact) {
    top = extreme_eigenvalues(gram)(1);
  } else {
    top = power_iteration(gram);
  }
  return 0.25 * top + lambda1;
}

LogisticProblem::LogisticProblem(const Matrix& features, const Vector& labels, double lambda1,
                                 double lambda2, LipschitzEstimate estimate)
    : LogisticProblem(features, labels, lambda1, lambda2,
                      lipschitz_of(features, lambda1, estimate)) {}

LogisticProblem::LogisticProblem(const Matrix& features, const Vector& labels, double lambda1,
                                 double lambda2, double lipschitz)
    : RegularizedProblem(features.cols(), lipschitz, lambda1, Regularizer::l1(lambda2)),
      features_t_(features.transpose()),
      labels_(labels),
      lambda1_(lambda1),
      lambda2_(lambda2) {
  if (labels.size() != features.rows()) throw DimensionError("one label per row required");
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) {
    throw std::invalid_argument("regularization weights must be nonnegative");
  }
  check_labels(labels);
  require_finite(features, "features");
}

void LogisticProblem::sample_gradient(const Vector& x, RandomStream& stream,
                                      Eigen::Ref<Vector> out) const {
  const auto i = static_cast<Index>(stream.uniform_index(static_cast<std::uint64_t>(num_samples())));
  const double z = labels_(i);
  const double margin = z * features_t_.col(i).dot(x);
  out.noalias() = (-z * logistic_weight(margin)) * features_t_.col(i);
  if (lambda1_ != 0.0) out.noalias() += lambda1_ * x;
}

Vector LogisticProblem::full_gradient(const Vector& x) const {
  const Vector margins = labels_.cwiseProduct(features_t_.transpose() * x);
  Vector coef(margins.size());
  for (Index i = 0; i < margins.size(); ++i) coef(i) = -labels_(i) * logistic_weight(margins(i));
  Vector g = features_t_ * coef / static_cast<double>(num_samples());
  if (lambda1_ != 0.0) g.noalias() += lambda1_ * x;
  return g;
}

double LogisticProblem::smooth_value(const Vector& x) const {
  const Vector margins = labels_.cwiseProduct(features_t_.transpose() * x);
  double loss = 0.0;
  for (Index i = 0; i < margins.size(); ++i) loss += softplus(-margins(i));
  return loss / static_cast<double>(num_samples()) + 0.5 * lambda1_ * x.squaredNorm();
}

LogisticProblem make_synthetic_logistic(Index dimension, Index num_samples, double lambda1,
                                        double lambda2, std::uint64_t seed, double label_noise) {
  if (dimension < 1 || num_samples < 1) throw std::invalid_argument("empty synthetic dataset");
  if (!(label_noise >= 0.0 && label_noise <= 1.0)) {
    throw std::invalid_argument("label_noise must lie in [0, 1]");
  }
  RandomStream stream = RandomStream::derive(seed, RandomStream::kDataReplication);
  const double scale = std::pow(static_cast<double>(dimension), -0.25);  // variance 1/sqrt(d)
  Vector separator(dimension);
  stream.fill_normal({separator.data(), static_cast<std::size_t>(dimension)});

  Matrix features(num_samples, dimension);
  Vector labels(num_samples);
  Vector row(dimension);
  for (Index i = 0; i < num_samples; ++i) {
    stream.fill_normal({row.data(), static_cast<std::size_t>(dimension)});
    features.row(i) = scale * row.transpose();
    double z = features.row(i).dot(separator) >= 0.0 ? 1.0 : -1.0;
    if (stream.uniform() < label_noise) z = -z;
    labels(i) = z;
  }
  return LogisticProblem(features, labels, lambda1, lambda2, LipschitzEstimate::exact);
}

LogisticPopulationProblem::LogisticPopulationProblem(Index dimension, double lambda1, double lambda2,
                                             std::uint64_t seed, double label_noise)
    : RegularizedProblem(dimension, 0.25 / std::sqrt(static_cast<double>(dimension)) + lambda1,
                         lambda1, Regularizer::l1(lambda2)),
      separator_(dimension),
      lambda1_(lambda1),
      label_noise_(label_noise),
      feature_scale_(std::pow(static_cast<double>(dimension), -0.25)) {
  if (!(label_noise >= 0.0 && label_noise <= 1.0)) {
    throw std::invalid_argument("label_noise must lie in [0, 1]");
  }
  RandomStream stream = RandomStream::derive(seed, RandomStream::kDataReplication);
  stream.fill_normal({separator_.data(), static_cast<std::size_t>(dimension)});
}

void LogisticPopulationProblem::sample_gradient(const Vector& x, RandomStream& stream,
                                            Eigen::Ref<Vector> out) const {
  stream.fill_normal({out.data(), static_cast<std::size_t>(out.size())});
  out *= feature_scale_;  // out holds the example y
  double z = out.dot(separator_) >= 0.0 ? 1.0 : -1.0;
  if (stream.uniform() < label_noise_) z = -z;
  out *= -z * logistic_weight(z * out.dot(x));
  if (lambda1_ != 0.0) out.noalias() += lambda1_ * x;
}

// --- parameter estimation ---------------------------------------------------

ParamEstimationProblem::ParamEstimationProblem(const Matrix& covariance, const Vector& x_star,
                                               double sigma_v, double lambda)
    : ParamEstimationProblem(covariance, x_star, sigma_v, lambda,
                             extreme_eigenvalues(covariance)) {}

ParamEstimationProblem::ParamEstimationProblem(const Matrix& covariance, const Vector& x_star,
                                               double sigma_v, double lambda,
                                               const Eigen::Vector2d& spectrum)
    : RegularizedProblem(covariance.rows(), 2.0 * spectrum(1), 2.0 * std::max(spectrum(0), 0.0),
                         lambda > 0.0 ? Regularizer::l1(lambda) : Regularizer::none()),
      covariance_(covariance),
      planted_(x_star),
      sigma_v_(sigma_v) {
  if (x_star.size() != covariance.rows()) throw DimensionError("x_star dimension differs from R_u");
  if (!(sigma_v >= 0.0)) throw std::invalid_argument("sigma_v must be nonnegative");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
  Eigen::LLT<Matrix> llt(covariance);
  if (llt.info() != Eigen::Success || !(spectrum(0) > 0.0)) {
    throw NumericalError("R_u is not positive definite (Cholesky failed)");
  }
  chol_ = llt.matrixL();
  if (lambda == 0.0) set_known_optimum(x_star);
}

void ParamEstimationProblem::sample_gradient(const Vector& x, RandomStream& stream,
                                             Eigen::Ref<Vector> out) const {
  const Index d = dimension();
  thread_local Vector scratch;
  scratch.resize(d + 1);
  stream.fill_normal({scratch.data(), static_cast<std::size_t>(d + 1)});
  out.noalias() = chol_.triangularView<Eigen::Lower>() * scratch.head(d);  // u
  const double l = out.dot(planted_) + sigma_v_ * scratch(d);
  out *= 2.0 * (out.dot(x) - l);
}

Vector ParamEstimationProblem::full_gradient(const Vector& x) const {
  return 2.0 * covariance_ * (x - planted_);
}

double ParamEstimationProblem::smooth_value(const Vector& x) const {
  const Vector e = x - planted_;
  return e.dot(covariance_ * e) + sigma_v_ * sigma_v_;
}

Matrix random_orthogonal(Index dimension, RandomStream& stream) {
  Matrix gauss(dimension, dimension);
  stream.fill_normal({gauss.data(), static_cast<std::size_t>(gauss.size())});
  Eigen::HouseholderQR<Matrix> qr(gauss);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < dimension; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

ParamEstimationProblem make_param_estimation(Index dimension, double condition_number,
                                             double sigma_v, double lambda, std::uint64_t seed) {
  if (dimension < 1) throw std::invalid_argument("dimension must be >= 1");
  if (!(condition_number >= 1.0)) throw std::invalid_argument("condition_number must be >= 1");
  RandomStream stream = RandomStream::derive(seed, RandomStream::kDataReplication);
  const Matrix q = random_orthogonal(dimension, stream);
  Vector spectrum(dimension);
  for (Index i = 0; i < dimension; ++i) {
    const double t = dimension == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(dimension - 1);
    spectrum(i) = std::pow(condition_number, -t);
  }
  Matrix covariance = q * spectrum.asDiagonal() * q.transpose();
  covariance = 0.5 * (covariance + covariance.transpose()).eval();
  Vector x_star(dimension);
  stream.fill_normal({x_star.data(), static_cast<std::size_t>(dimension)});
  return ParamEstimationProblem(covariance, x_star, sigma_v, lambda);
}

// --- lasso toy --------------------------------------------------------------

LassoToyProblem::LassoToyProblem(const Matrix& q, const Vector& b, double lambda, double noise)
    : RegularizedProblem(q.cols(), 1.0, 1.0, Regularizer::l1(lambda)),
      q_(q),
      b_(b),
      lambda_(lambda),
      noise_(noise) {
  if (q.rows() != q.cols() || b.size() != q.rows()) throw DimensionError("lasso toy: Q must be d x d, b of size d");
  if (!(lambda > 0.0)) throw std::invalid_argument("lasso toy lambda must be positive");
  if (!(noise >= 0.0)) throw std::invalid_argument("noise must be nonnegative");
  if (!(q.transpose() * q).isIdentity(1e-10)) throw std::invalid_argument("lasso toy design must be orthogonal");
  set_known_optimum(closed_form_optimum());
}

Vector LassoToyProblem::closed_form_optimum() const {
  return soft_threshold(Vector(q_.transpose() * b_), lambda_);
}

void LassoToyProblem::sample_gradient(const Vector& x, RandomStream& stream,
                                      Eigen::Ref<Vector> out) const {
  out = full_gradient(x);
  if (noise_ > 0.0) {
    thread_local Vector scratch;
    scratch.resize(dimension());
    stream.fill_normal({scratch.data(), static_cast<std::size_t>(dimension())});
    out += noise_ * scratch;
  }
}

Vector LassoToyProblem::full_gradient(const Vector& x) const {
  return q_.transpose() * (q_ * x - b_);
}

double LassoToyProblem::smooth_value(const Vector& x) const {
  return 0.5 * (q_ * x - b_).squaredNorm();
}

LassoToyProblem make_lasso_toy(Index dimension, double lambda, double noise, std::uint64_t seed) {
  RandomStream stream = RandomStream::derive(seed, RandomStream::kDataReplication);
  const Matrix q = random_orthogonal(dimension, stream);
  Vector b(dimension);
  stream.fill_normal({b.data(), static_cast<std::size_t>(dimension)});
  b *= 2.0;
  return LassoToyProblem(q, b, lambda, noise);
}

// --- dataset loading --------------------------------------------------------

namespace {

[[noreturn]] void parse_fail(const std::string& path, std::size_t line, const std::string& what) {
  throw ParseError(path + ":" + std::to_string(line) + ": " + what);
}

bool parse_double(std::string_view text, double& out) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

double normalize_label(double raw, const std::string& path, std::size_t line) {
  if (raw == 1.0) return 1.0;
  if (raw == -1.0 || raw == 0.0) return -1.0;
  parse_fail(path, line, "label must be one of -1, +1, 0, 1");
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

LogisticProblem load_sparse_dataset(const std::string& path, DatasetFormat format,
                                    double lambda1, double lambda2) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");

  std::vector<std::vector<std::pair<Index, double>>> rows;
  std::vector<double> labels;
  Index width = 0;
  std::string line;
  std::size_t line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    std::vector<std::pair<Index, double>> entries;
    double label = 0.0;
    if (format == DatasetFormat::csv) {
      const auto fields = split(line, ',');
      std::vector<double> values(fields.size());
      bool numeric = true;
      for (std::size_t k = 0; k < fields.size(); ++k) numeric = numeric && parse_double(fields[k], values[k]);
      if (!numeric) {
        if (rows.empty() && labels.empty() && line_no == 1) continue;  // header
        parse_fail(path, line_no, "non-numeric field");
      }
      if (fields.size() < 2) parse_fail(path, line_no, "need at least one feature and a label");
      const Index features = static_cast<Index>(fields.size()) - 1;
      if (width != 0 && features != width) parse_fail(path, line_no, "inconsistent column count");
      width = features;
      for (Index j = 0; j < features; ++j) entries.emplace_back(j, values[static_cast<std::size_t>(j)]);
      label = normalize_label(values.back(), path, line_no);
    } else {
      std::istringstream tokens(line);
      std::string token;
      if (!(tokens >> token)) continue;
      if (token.front() == '#') continue;
      double raw = 0.0;
      if (!parse_double(token, raw)) parse_fail(path, line_no, "bad label '" + token + "'");
      label = normalize_label(raw, path, line_no);
      while (tokens >> token) {
        if (token.front() == '#') break;
        const auto colon = token.find(':');
        if (colon == std::string::npos) parse_fail(path, line_no, "expected index:value, got '" + token + "'");
        double idx = 0.0, value = 0.0;
        if (!parse_double(std::string_view(token).substr(0, colon), idx) ||
            !parse_double(std::string_view(token).substr(colon + 1), value) || idx < 1.0 ||
            idx != std::floor(idx)) {
          parse_fail(path, line_no, "bad feature '" + token + "' (indices are 1-based)");
        }
        const auto col = static_cast<Index>(idx) - 1;
        entries.emplace_back(col, value);
        width = std::max(width, col + 1);
      }
    }
    rows.push_back(std::move(entries));
    labels.push_back(label);
  }
  if (rows.empty()) throw ParseError(path + ": no data rows");

  Matrix features = Matrix::Zero(static_cast<Index>(rows.size()), width);
  Vector z(static_cast<Index>(labels.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& [col, value] : rows[i]) features(static_cast<Index>(i), col) = value;
    z(static_cast<Index>(i)) = labels[i];
  }
  return LogisticProblem(features, z, lambda1, lambda2, LipschitzEstimate::power_iteration);
}

}  // namespace adanapg
