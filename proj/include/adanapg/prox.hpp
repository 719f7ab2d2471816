#ifndef ADANAPG_PROX_HPP
#define ADANAPG_PROX_HPP

#include <stdexcept>
#include <string>

#include "adanapg/core.hpp"

namespace adanapg {

/// Closed catalog of convex regularizers h with closed-form proxes.
///
///   none           h = 0
///   l1             h = l1_weight * ||x||_1
///   l2_squared     h = (l2_weight / 2) * ||x||^2
///   elastic_net    h = l1_weight * ||x||_1 + (l2_weight / 2) * ||x||^2
struct Regularizer {
  enum class Kind { none, l1, l2_squared, elastic_net };

  Kind kind = Kind::none;
  double l1_weight = 0.0;
  double l2_weight = 0.0;

  static Regularizer none() { return {}; }
  static Regularizer l1(double lambda) { return checked({Kind::l1, lambda, 0.0}); }
  static Regularizer l2_squared(double lambda) {
    return checked({Kind::l2_squared, 0.0, lambda});
  }
  static Regularizer elastic_net(double l1_lambda, double l2_lambda) {
    return checked({Kind::elastic_net, l1_lambda, l2_lambda});
  }

  template <typename Derived>
  typename Derived::Scalar value(const Eigen::MatrixBase<Derived>& x) const {
    using Scalar = typename Derived::Scalar;
    Scalar h(0);
    if (kind == Kind::l1 || kind == Kind::elastic_net) h += Scalar(l1_weight) * x.template lpNorm<1>();
    if (kind == Kind::l2_squared || kind == Kind::elastic_net) {
      h += Scalar(0.5 * l2_weight) * x.squaredNorm();
    }
    return h;
  }

 private:
  static Regularizer checked(Regularizer r) {
    if (!(r.l1_weight >= 0.0) || !(r.l2_weight >= 0.0)) {
      throw std::invalid_argument("regularizer weights must be nonnegative");
    }
    return r;
  }
};

/// sign(x_i) * max(|x_i| - tau, 0); |x_i| == tau maps to 0.
template <typename Derived>
typename Derived::PlainObject soft_threshold(const Eigen::MatrixBase<Derived>& x,
                                             typename Derived::Scalar tau) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([tau](Scalar v) {
    const Scalar shrunk = std::abs(v) - tau;
    return shrunk > Scalar(0) ? std::copysign(shrunk, v) : Scalar(0);
  });
}

template <typename Derived>
typename Derived::PlainObject prox_apply(const Regularizer& reg,
                                         const Eigen::MatrixBase<Derived>& x,
                                         typename Derived::Scalar step) {
  using Scalar = typename Derived::Scalar;
  if (!(step > Scalar(0))) throw std::invalid_argument("prox step must be positive");
  switch (reg.kind) {
    case Regularizer::Kind::none:
      return x;
    case Regularizer::Kind::l1:
      return soft_threshold(x, step * Scalar(reg.l1_weight));
    case Regularizer::Kind::l2_squared:
      return x / (Scalar(1) + step * Scalar(reg.l2_weight));
    case Regularizer::Kind::elastic_net:
      return soft_threshold(x, step * Scalar(reg.l1_weight)) /
             (Scalar(1) + step * Scalar(reg.l2_weight));
  }
  throw std::logic_error("unknown regularizer kind");
}

/// G_alpha(x) = (x - prox_{alpha h}(x - alpha * grad)) / alpha.
///
/// With the exact gradient this is the gradient mapping; with an estimated
/// gradient it is the sample gradient mapping.
inline Vector gradient_mapping(const CompositeProblem& problem, const Vector& x,
                               const Vector& grad_at_x, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("gradient mapping step must be positive");
  require_same_size(x, grad_at_x, "gradient_mapping");
  if (x.size() != problem.dimension()) {
    throw DimensionError("gradient_mapping: point dimension differs from problem dimension");
  }
  return (x - problem.prox(x - alpha * grad_at_x, alpha)) / alpha;
}

}  // namespace adanapg

#endif
