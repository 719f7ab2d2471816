#ifndef ADANAPG_CORE_HPP
#define ADANAPG_CORE_HPP

#include <Eigen/Core>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "adanapg/random.hpp"

namespace adanapg {

using Index = Eigen::Index;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = VectorX<double>;
using Matrix = MatrixX<double>;

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A requested optional problem capability (exact gradient, exact value)
/// is not provided.
struct CapabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename A, typename B>
void require_same_size(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b,
                       const char* what) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" +
                         std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& a, const char* what) {
  if (!a.allFinite()) throw NumericalError(std::string(what) + ": non-finite component");
}

template <typename A, typename B>
typename A::Scalar dot(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  require_same_size(a, b, "dot");
  return a.dot(b);
}

template <typename Derived>
typename Derived::Scalar norm(const Eigen::MatrixBase<Derived>& a) {
  return a.norm();
}

/// Stochastic composite problem min f(x) + h(x), f = E[F(x, xi)].
///
/// Implementations supply one unbiased draw of the gradient of f, the
/// nonsmooth part h and its proximal map. Exact gradient and exact value of
/// f are optional capabilities; calling them when absent throws
/// CapabilityError.
class CompositeProblem {
 public:
  virtual ~CompositeProblem() = default;

  Index dimension() const { return dimension_; }
  double lipschitz() const { return lipschitz_; }
  double strong_convexity() const { return strong_convexity_; }
  const std::optional<Vector>& known_optimum() const { return known_optimum_; }

  /// One draw g(x, xi) written into `out` (size d).
  virtual void sample_gradient(const Vector& x, RandomStream& stream,
                               Eigen::Ref<Vector> out) const = 0;

  Vector sample_gradient(const Vector& x, RandomStream& stream) const {
    Vector g(dimension_);
    sample_gradient(x, stream, g);
    return g;
  }

  virtual bool has_full_gradient() const { return false; }
  virtual Vector full_gradient(const Vector& /*x*/) const {
    throw CapabilityError("problem does not expose an exact gradient");
  }

  virtual bool has_smooth_value() const { return false; }
  virtual double smooth_value(const Vector& /*x*/) const {
    throw CapabilityError("problem does not expose the exact smooth value");
  }

  virtual double nonsmooth_value(const Vector& x) const = 0;

  /// prox_{step * h}(x)
  virtual Vector prox(const Vector& x, double step) const = 0;

  /// F(x) = f(x) + h(x); needs the smooth-value capability.
  double objective(const Vector& x) const { return smooth_value(x) + nonsmooth_value(x); }

  void set_known_optimum(Vector x_star);

 protected:
  CompositeProblem(Index dimension, double lipschitz, double strong_convexity);

 private:
  Index dimension_;
  double lipschitz_;
  double strong_convexity_;
  std::optional<Vector> known_optimum_;
};

}  // namespace adanapg

#endif
