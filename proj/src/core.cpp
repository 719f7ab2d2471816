#include "adanapg/core.hpp"

namespace adanapg {

CompositeProblem::CompositeProblem(Index dimension, double lipschitz, double strong_convexity)
    : dimension_(dimension), lipschitz_(lipschitz), strong_convexity_(strong_convexity) {
  if (dimension < 1) throw std::invalid_argument("problem dimension must be >= 1");
  if (!(lipschitz > 0.0) || !std::isfinite(lipschitz)) {
    throw std::invalid_argument("lipschitz constant must be positive and finite");
  }
  if (!(strong_convexity >= 0.0) || strong_convexity > lipschitz) {
    throw std::invalid_argument("strong convexity must lie in [0, L]");
  }
}

void CompositeProblem::set_known_optimum(Vector x_star) {
  if (x_star.size() != dimension_) {
    throw DimensionError("known optimum has dimension " + std::to_string(x_star.size()) +
                         ", problem has " + std::to_string(dimension_));
  }
  require_finite(x_star, "known optimum");
  known_optimum_ = std::move(x_star);
}

}  // namespace adanapg
