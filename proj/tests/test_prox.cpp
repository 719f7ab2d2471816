#include <gtest/gtest.h>

#include "adanapg/problems.hpp"
#include "adanapg/prox.hpp"
#include "support.hpp"

using namespace adanapg;
using testkit::catalog;
using testkit::numeric_prox;

TEST(Prox, L1WithZeroWeightIsIdentity) {
  const Vector x = Eigen::Vector3d(1.5, -2.0, 0.1);
  EXPECT_EQ(prox_apply(Regularizer::l1(0.0), x, 3.0), x);
}

TEST(Prox, L1Example) {
  const Vector out = prox_apply(Regularizer::l1(1.0), Eigen::Vector2d(1.2, -0.3), 0.5);
  const Vector oracle = numeric_prox(Regularizer::l1(1.0), Eigen::Vector2d(1.2, -0.3), 0.5);
  EXPECT_NEAR(out(0), 0.7, 1e-15);
  EXPECT_EQ(out(1), 0.0);
  EXPECT_LE((out - oracle).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Prox, L2SquaredExample) {
  const Vector x = Vector::Constant(1, 3.0);
  const Vector out = prox_apply(Regularizer::l2_squared(2.0), x, 0.5);
  EXPECT_DOUBLE_EQ(out(0), 1.5);
  EXPECT_NEAR(numeric_prox(Regularizer::l2_squared(2.0), x, 0.5)(0), 1.5, 1e-6);
}

TEST(Prox, ClosedFormsMatchNumericMinimization) {
  RandomStream stream = RandomStream::derive(11, 0);
  for (const auto& reg : catalog()) {
    for (int trial = 0; trial < 20; ++trial) {
      const Vector x = testkit::random_vector(5, stream, 2.0);
      const double step = 0.1 + stream.uniform();
      const Vector closed = prox_apply(reg, x, step);
      const Vector numeric = numeric_prox(reg, x, step);
      EXPECT_LE((closed - numeric).cwiseAbs().maxCoeff(), 1e-6);
    }
  }
}

TEST(Prox, SoftThresholdTieMapsToZero) {
  const Vector out = soft_threshold(Eigen::Vector2d(0.5, -0.5), 0.5);
  EXPECT_EQ(out(0), 0.0);
  EXPECT_EQ(out(1), 0.0);
}

TEST(Prox, RejectsNonpositiveStep) {
  EXPECT_THROW(prox_apply(Regularizer::l1(1.0), Vector::Ones(2), 0.0), std::invalid_argument);
  EXPECT_THROW(prox_apply(Regularizer::l1(1.0), Vector::Ones(2), -1.0), std::invalid_argument);
}

TEST(Prox, RejectsNegativeWeights) {
  EXPECT_THROW(Regularizer::l1(-1.0), std::invalid_argument);
  EXPECT_THROW(Regularizer::elastic_net(1.0, -1.0), std::invalid_argument);
}

TEST(Prox, Nonexpansive) {
  RandomStream stream = RandomStream::derive(12, 0);
  for (const auto& reg : catalog()) {
    for (int trial = 0; trial < 1000; ++trial) {
      const Vector a = testkit::random_vector(4, stream, 3.0);
      const Vector b = testkit::random_vector(4, stream, 3.0);
      const double step = 0.01 + 2.0 * stream.uniform();
      const double lhs = (prox_apply(reg, a, step) - prox_apply(reg, b, step)).norm();
      ASSERT_LE(lhs, (a - b).norm() + 1e-12);
    }
  }
}

TEST(GradientMapping, NoRegularizerReturnsGradient) {
  testkit::NoisyQuadratic p(Matrix::Identity(2, 2), Vector::Zero(2));
  const Vector x = Eigen::Vector2d(2.0, -1.0);
  const Vector grad = p.full_gradient(x);
  const Vector g = gradient_mapping(p, x, grad, 1.0);
  EXPECT_EQ(g, grad);
  EXPECT_EQ(g, x);
}

TEST(GradientMapping, ErrorDomination) {
  RandomStream stream = RandomStream::derive(13, 0);
  for (const auto& reg : catalog()) {
    const testkit::NoisyQuadratic p(Matrix::Identity(4, 4), Vector::Zero(4), reg);
    for (int trial = 0; trial < 1000; ++trial) {
      const Vector x = testkit::random_vector(4, stream, 2.0);
      const Vector g = testkit::random_vector(4, stream);
      const Vector delta = testkit::random_vector(4, stream, 0.5);
      const double alpha = 0.01 + stream.uniform();
      const double lhs =
          (gradient_mapping(p, x, Vector(g + delta), alpha) - gradient_mapping(p, x, g, alpha)).norm();
      ASSERT_LE(lhs, delta.norm() + 1e-12);
    }
  }
}

TEST(GradientMapping, VanishesAtLassoOptimum) {
  const LassoToyProblem p = make_lasso_toy(6, 0.4, 0.0, 3);
  const Vector x_star = p.closed_form_optimum();
  const double lipschitz = p.lipschitz();
  for (double alpha : {1.0 / lipschitz, 0.1 / lipschitz}) {
    EXPECT_LE(gradient_mapping(p, x_star, p.full_gradient(x_star), alpha).norm(), 1e-10);
  }
}

TEST(GradientMapping, RejectsBadArguments) {
  testkit::NoisyQuadratic p(Matrix::Identity(2, 2), Vector::Zero(2));
  EXPECT_THROW(gradient_mapping(p, Vector::Zero(2), Vector::Zero(2), 0.0), std::invalid_argument);
  EXPECT_THROW(gradient_mapping(p, Vector::Zero(2), Vector::Zero(3), 1.0), DimensionError);
}

// The gradient mapping is Lipschitz in x. The bound checked here is
// max(2 / alpha + L, 2 alpha + L); the largest observed ratio is printed.
TEST(GradientMapping, LipschitzConstant) {
  RandomStream stream = RandomStream::derive(14, 0);
  const Matrix a = testkit::random_spd(Eigen::Vector4d(0.5, 1.0, 2.0, 4.0), 5);
  for (const auto& reg : catalog()) {
    const testkit::NoisyQuadratic p(a, Vector::Ones(4), reg);
    for (double alpha : {0.05, 0.25, 1.0}) {
      double worst = 0.0;
      for (int trial = 0; trial < 500; ++trial) {
        const Vector x = testkit::random_vector(4, stream, 2.0);
        const Vector y = testkit::random_vector(4, stream, 2.0);
        const double num = (gradient_mapping(p, x, p.full_gradient(x), alpha) -
                            gradient_mapping(p, y, p.full_gradient(y), alpha))
                               .norm();
        worst = std::max(worst, num / (x - y).norm());
      }
      const double bound = std::max(2.0 / alpha + p.lipschitz(), 2.0 * alpha + p.lipschitz());
      EXPECT_LE(worst, bound);
      RecordProperty("measured_lipschitz", std::to_string(worst));
    }
  }
}
