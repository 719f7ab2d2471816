#include "adanapg/analysis.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace adanapg {
namespace {

void require_paths(const ReplicationEnsemble& ens) {
  if (ens.paths.empty()) throw PreconditionError("ensemble has no replications");
}

double scale_factor(double rho, Index n) {
  const double s = std::exp(-static_cast<double>(n) * std::log(rho));
  if (!std::isfinite(s)) throw NumericalError("rho^-n overflows at n = " + std::to_string(n));
  return s;
}

const Vector& iterate_at(const std::vector<IterationRecord>& path, Index n) {
  const auto& rec = path[static_cast<std::size_t>(n)];
  if (!rec.iterate) throw PreconditionError("iterates were not recorded");
  return *rec.iterate;
}

}  // namespace

Index ReplicationEnsemble::length() const {
  require_paths(*this);
  const std::size_t len = paths.front().size();
  for (const auto& p : paths) {
    if (p.size() != len) throw PreconditionError("replications have different lengths");
  }
  return static_cast<Index>(len);
}

Index ReplicationEnsemble::common_length() const {
  require_paths(*this);
  std::size_t len = paths.front().size();
  for (const auto& p : paths) len = std::min(len, p.size());
  return static_cast<Index>(len);
}

double median(std::vector<double> values) {
  if (values.empty()) throw PreconditionError("median of empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower =
      *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

std::vector<CurvePoint> rmse_curve(const ReplicationEnsemble& ens) {
  const Index len = ens.length();
  std::vector<CurvePoint> out;
  out.reserve(static_cast<std::size_t>(len));
  for (Index n = 0; n < len; ++n) {
    double sum = 0.0;
    for (const auto& path : ens.paths) {
      const auto& rec = path[static_cast<std::size_t>(n)];
      if (!rec.dist_sq) throw PreconditionError("rmse needs x_star (distance not recorded)");
      sum += *rec.dist_sq;
    }
    out.push_back({n, std::sqrt(sum / static_cast<double>(ens.replications()))});
  }
  return out;
}

RateFit rate_fit(std::span<const CurvePoint> curve, Index n_lo, Index n_hi, double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in (0, 1)");
  std::vector<double> xs, ys;
  for (const auto& p : curve) {
    if (p.n < n_lo || p.n > n_hi) continue;
    if (!(p.value > 0.0)) {
      throw PreconditionError("rate fit: nonpositive value at n = " + std::to_string(p.n));
    }
    xs.push_back(static_cast<double>(p.n));
    ys.push_back(std::log(p.value));
  }
  if (xs.size() < 2) throw PreconditionError("rate fit needs at least two points in the window");

  const double m = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.theoretical_slope = 0.5 * std::log(rho);
  if (syy == 0.0) {
    fit.r_squared = 1.0;
  } else {
    double ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
      ss_res += r * r;
    }
    fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  }
  return fit;
}

Matrix rescaled_noise_covariance(const ReplicationEnsemble& ens, double rho, Index n) {
  require_paths(ens);
  Matrix w;
  for (const auto& path : ens.paths) {
    const auto& rec = path.at(static_cast<std::size_t>(n));
    if (!rec.noise) throw PreconditionError("gradient noise was not recorded");
    if (w.size() == 0) w = Matrix::Zero(rec.noise->size(), rec.noise->size());
    w.noalias() += *rec.noise * rec.noise->transpose();
  }
  return w * (scale_factor(rho, n) / static_cast<double>(ens.replications()));
}

std::vector<CurvePoint> covariance_gap_curve(const ReplicationEnsemble& ens, double rho) {
  const Index len = ens.length();
  const auto& first = ens.paths.front().front();
  if (!first.noise) throw PreconditionError("gradient noise was not recorded");
  if (first.noise->size() > 200) throw PreconditionError("covariance gap limited to d <= 200");

  std::vector<CurvePoint> out;
  if (len < 2) return out;
  Matrix prev = rescaled_noise_covariance(ens, rho, 0);
  for (Index n = 0; n + 1 < len; ++n) {
    Matrix next = rescaled_noise_covariance(ens, rho, n + 1);
    out.push_back({n, (next - prev).norm()});
    prev = std::move(next);
  }
  return out;
}

Matrix scaled_errors(const ReplicationEnsemble& ens, Index n) {
  const Index len = ens.length();
  if (!ens.meta.x_star) throw PreconditionError("normality needs x_star");
  if (n < 1 || n >= len) throw PreconditionError("terminal iteration out of range");
  if (!(ens.meta.alpha > 0.0)) throw PreconditionError("ensemble step size unknown");
  const Vector& x_star = *ens.meta.x_star;
  const Index d = x_star.size();
  const double scale = std::sqrt(scale_factor(ens.meta.rho(), n)) / ens.meta.alpha;

  Matrix out(2 * d, ens.replications());
  for (Index j = 0; j < ens.replications(); ++j) {
    const auto& path = ens.paths[static_cast<std::size_t>(j)];
    out.col(j).head(d) = scale * (iterate_at(path, n) - x_star);
    out.col(j).tail(d) = scale * (iterate_at(path, n - 1) - x_star);
  }
  return out;
}

Matrix sample_covariance(const Matrix& samples) {
  const Vector mean = samples.rowwise().mean();
  const Matrix centered = samples.colwise() - mean;
  return centered * centered.transpose() / static_cast<double>(samples.cols());
}

ComponentMoments moment_flags(std::span<const double> values) {
  if (values.size() < 2) throw PreconditionError("moments need at least two values");
  const double m = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= m;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double c = v - mean;
    m2 += c * c;
    m3 += c * c * c;
    m4 += c * c * c * c;
  }
  m2 /= m;
  m3 /= m;
  m4 /= m;

  ComponentMoments out;
  out.mean = mean;
  out.variance = m2;
  if (m2 > 0.0) {
    out.skewness = m3 / std::pow(m2, 1.5);
    out.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }
  out.skewness_ok = std::abs(out.skewness) <= 4.0 * std::sqrt(6.0 / m);
  out.kurtosis_ok = std::abs(out.excess_kurtosis) <= 4.0 * std::sqrt(24.0 / m);
  return out;
}

Index NormalityReport::passing() const {
  return static_cast<Index>(std::count_if(components.begin(), components.end(),
                                          [](const ComponentMoments& c) { return c.pass(); }));
}

NormalityReport normality_report(const ReplicationEnsemble& ens, Index n_terminal,
                                 std::span<const Index> components) {
  if (ens.replications() < kMinNormalityReplications) {
    throw PreconditionError("normality needs at least " + std::to_string(kMinNormalityReplications) +
                            " replications, got " + std::to_string(ens.replications()));
  }
  const Matrix errors = scaled_errors(ens, n_terminal);
  const double m = static_cast<double>(ens.replications());

  NormalityReport report;
  report.n_terminal = n_terminal;
  report.replications = ens.replications();
  report.skewness_threshold = 4.0 * std::sqrt(6.0 / m);
  report.kurtosis_threshold = 4.0 * std::sqrt(24.0 / m);
  for (Index c : components) {
    if (c < 0 || c >= errors.rows()) {
      throw PreconditionError("component " + std::to_string(c) + " outside [0, 2d)");
    }
    const Vector row = errors.row(c).transpose();
    ComponentMoments moments = moment_flags({row.data(), static_cast<std::size_t>(row.size())});
    moments.component = c;
    report.components.push_back(moments);
  }
  report.covariance = sample_covariance(errors);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(report.covariance, Eigen::EigenvaluesOnly);
  report.min_eigenvalue = eig.eigenvalues().minCoeff();
  return report;
}

double covariance_stabilization_gap(const ReplicationEnsemble& ens, Index n_a, Index n_b) {
  const Matrix a = sample_covariance(scaled_errors(ens, n_a));
  const Matrix b = sample_covariance(scaled_errors(ens, n_b));
  const double denom = b.norm();
  if (!(denom > 0.0)) throw PreconditionError("degenerate covariance at n = " + std::to_string(n_b));
  return (b - a).norm() / denom;
}

std::vector<EfficiencyPoint> efficiency_curve(const ReplicationEnsemble& ens) {
  const Index len = ens.common_length();
  const double m = static_cast<double>(ens.replications());
  std::vector<EfficiencyPoint> out;
  for (Index n = 0; n < len; ++n) {
    EfficiencyPoint p;
    p.n = n;
    for (const auto& path : ens.paths) {
      const auto& rec = path[static_cast<std::size_t>(n)];
      if (!rec.objective) throw PreconditionError("objective values were not recorded");
      p.mean_cum_samples += static_cast<double>(rec.cum_samples);
      p.mean_objective += *rec.objective;
    }
    p.mean_cum_samples /= m;
    p.mean_objective /= m;
    out.push_back(p);
  }
  return out;
}

std::vector<CurvePoint> sample_complexity_check(const ReplicationEnsemble& ens) {
  const Index len = ens.length();
  std::vector<CurvePoint> out;
  std::vector<double> products(ens.paths.size());
  for (Index n = 0; n < len; ++n) {
    for (std::size_t j = 0; j < ens.paths.size(); ++j) {
      const auto& rec = ens.paths[j][static_cast<std::size_t>(n)];
      if (!rec.dist_sq) throw PreconditionError("sample complexity needs x_star");
      products[j] = static_cast<double>(rec.cum_samples) * *rec.dist_sq;
    }
    out.push_back({n, median(products)});
  }
  return out;
}

std::vector<SummaryRow> ensemble_summary(const ReplicationEnsemble& ens) {
  const Index len = ens.common_length();
  const double m = static_cast<double>(ens.replications());
  std::vector<SummaryRow> out;
  std::vector<double> objectives;
  for (Index n = 0; n < len; ++n) {
    SummaryRow row;
    row.n = n;
    objectives.clear();
    double dist = 0.0;
    bool have_dist = true;
    for (const auto& path : ens.paths) {
      const auto& rec = path[static_cast<std::size_t>(n)];
      row.mean_cum_samples += static_cast<double>(rec.cum_samples);
      row.mean_batch_size += static_cast<double>(rec.batch_size);
      if (rec.objective) objectives.push_back(*rec.objective);
      if (rec.dist_sq) {
        dist += *rec.dist_sq;
      } else {
        have_dist = false;
      }
    }
    row.mean_cum_samples /= m;
    row.mean_batch_size /= m;
    if (objectives.size() == ens.paths.size()) {
      double sum = 0.0;
      for (double v : objectives) sum += v;
      row.mean_objective = sum / m;
      row.median_objective = median(objectives);
    }
    if (have_dist) row.rmse = std::sqrt(dist / m);
    out.push_back(row);
  }
  return out;
}

Histogram histogram(std::span<const double> values, Index bins) {
  if (values.empty() || bins < 1) throw PreconditionError("histogram needs values and >= 1 bin");
  Histogram h;
  h.lo = *std::min_element(values.begin(), values.end());
  h.hi = *std::max_element(values.begin(), values.end());
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  const double width = (h.hi - h.lo) / static_cast<double>(bins);
  for (double v : values) {
    Index b = width > 0.0 ? static_cast<Index>((v - h.lo) / width) : 0;
    b = std::clamp<Index>(b, 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

}  // namespace adanapg
