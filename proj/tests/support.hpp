#ifndef ADANAPG_TESTS_SUPPORT_HPP
#define ADANAPG_TESTS_SUPPORT_HPP

#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <vector>

#include "adanapg/core.hpp"
#include "adanapg/problems.hpp"
#include "adanapg/prox.hpp"

namespace adanapg::testkit {

/// f(x) = 1/2 x'Ax - b'x plus a catalog regularizer. Each draw is the exact
/// gradient plus Normal(0, noise^2 I).
class NoisyQuadratic final : public RegularizedProblem {
 public:
  NoisyQuadratic(const Matrix& a, const Vector& b, Regularizer reg = Regularizer::none(),
                 double noise = 0.0)
      : RegularizedProblem(a.rows(), spectrum(a)(1), std::max(0.0, spectrum(a)(0)), reg),
        a_(a),
        b_(b),
        noise_(noise) {}

  using CompositeProblem::sample_gradient;
  void sample_gradient(const Vector& x, RandomStream& stream,
                       Eigen::Ref<Vector> out) const override {
    out.noalias() = a_ * x - b_;
    if (noise_ > 0.0) {
      for (Index i = 0; i < out.size(); ++i) out(i) += noise_ * stream.normal();
    }
  }
  bool has_full_gradient() const override { return true; }
  Vector full_gradient(const Vector& x) const override { return a_ * x - b_; }
  bool has_smooth_value() const override { return true; }
  double smooth_value(const Vector& x) const override { return 0.5 * x.dot(a_ * x) - b_.dot(x); }

  const Matrix& a() const { return a_; }
  const Vector& b() const { return b_; }

 private:
  static Eigen::Vector2d spectrum(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
    return {eig.eigenvalues().minCoeff(), eig.eigenvalues().maxCoeff()};
  }

  Matrix a_;
  Vector b_;
  double noise_;
};

/// One-dimensional problem with gradient identically `slope` and additive
/// Normal(0, sigma^2) draws; h = 0, L = 1, mu = 0.
class ConstantGradient final : public RegularizedProblem {
 public:
  ConstantGradient(double slope, double sigma)
      : RegularizedProblem(1, 1.0, 0.0, Regularizer::none()), slope_(slope), sigma_(sigma) {}

  using CompositeProblem::sample_gradient;
  void sample_gradient(const Vector&, RandomStream& stream, Eigen::Ref<Vector> out) const override {
    out(0) = slope_ + sigma_ * stream.normal();
  }

 private:
  double slope_;
  double sigma_;
};

/// Diagonal positive definite matrix with the given spectrum rotated by a
/// random orthogonal matrix.
inline Matrix random_spd(const Vector& eigenvalues, std::uint64_t seed) {
  RandomStream stream = RandomStream::derive(seed, 0);
  const Matrix q = random_orthogonal(eigenvalues.size(), stream);
  Matrix a = q * eigenvalues.asDiagonal() * q.transpose();
  return 0.5 * (a + a.transpose());
}

inline Vector random_vector(Index d, RandomStream& stream, double scale = 1.0) {
  Vector v(d);
  stream.fill_normal({v.data(), static_cast<std::size_t>(d)});
  return scale * v;
}

// argmin_u phi(u) over [lo, hi] for a convex scalar phi
inline double golden_section(const std::function<double(double)>& phi, double lo, double hi) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = phi(c), fd = phi(d);
  while (b - a > 1e-12) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = phi(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = phi(d);
    }
  }
  return 0.5 * (a + b);
}

// Every catalog h is separable, so the prox is minimized per coordinate.
inline Vector numeric_prox(const Regularizer& reg, const Vector& x, double step) {
  Vector u(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    auto phi = [&](double t) {
      Vector e = Vector::Zero(1);
      e(0) = t;
      return step * reg.value(e) + 0.5 * (t - x(i)) * (t - x(i));
    };
    const double span = std::abs(x(i)) + 1.0;
    u(i) = golden_section(phi, -span, span);
  }
  return u;
}

inline std::vector<Regularizer> catalog() {
  return {Regularizer::none(), Regularizer::l1(0.7), Regularizer::l2_squared(1.3),
          Regularizer::elastic_net(0.4, 2.0)};
}

}  // namespace adanapg::testkit

#endif
