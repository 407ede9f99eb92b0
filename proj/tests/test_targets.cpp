#include <gtest/gtest.h>

#include <cmath>

#include "aldi/errors.hpp"
#include "aldi/rng.hpp"
#include "aldi/targets.hpp"

namespace aldi {
namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

GaussianInverseProblem identity_problem(Index dim, double noise, const Vector& y) {
  return linear_gaussian_problem(Matrix::Identity(dim, dim), Vector::Zero(dim),
                                 noise * Matrix::Identity(dim, dim), y, Vector::Zero(dim),
                                 Matrix::Identity(dim, dim));
}

Vector central_difference(const TargetDensity& t, const Vector& u, double eps) {
  Vector g(u.size());
  for (Index i = 0; i < u.size(); ++i) {
    Vector up = u, dn = u;
    up(i) += eps;
    dn(i) -= eps;
    g(i) = (t.potential(up) - t.potential(dn)) / (2.0 * eps);
  }
  return g;
}

TEST(Targets, MisfitZeroAtData) {
  const Vector y = vec({0.3, -1.2});
  EXPECT_DOUBLE_EQ(misfit(identity_problem(2, 1.0, y), y), 0.0);
}

TEST(Targets, MisfitScalarCases) {
  EXPECT_DOUBLE_EQ(misfit(identity_problem(1, 1.0, vec({2.0})), vec({0.0})), 2.0);
  EXPECT_DOUBLE_EQ(misfit(identity_problem(1, 4.0, vec({2.0})), vec({0.0})), 0.5);
}

TEST(Targets, MisfitPropagatesNonFiniteForward) {
  GaussianInverseProblem p(
      1, [](const Vector&) { return vec({std::nan("")}); }, Matrix::Identity(1, 1), vec({0.0}),
      vec({0.0}), Matrix::Identity(1, 1));
  EXPECT_THROW(misfit(p, vec({1.0})), NumericError);
}

TEST(Targets, ProblemRejectsNonSpdNoise) {
  Matrix r(2, 2);
  r << 1, 2, 2, 1;
  EXPECT_THROW(linear_gaussian_problem(Matrix::Identity(2, 2), Vector::Zero(2), r,
                                       Vector::Zero(2), Vector::Zero(2), Matrix::Identity(2, 2)),
               InvalidInput);
}

TEST(Targets, BipPotentialAndGradientVanishAtConsistentPrior) {
  const Vector mu = vec({0.5, -0.5});
  const auto p = linear_gaussian_problem(Matrix::Identity(2, 2), Vector::Zero(2),
                                         Matrix::Identity(2, 2), mu, mu, Matrix::Identity(2, 2));
  const TargetDensity t = bip_target(p);
  EXPECT_DOUBLE_EQ(t.potential(mu), 0.0);
  EXPECT_EQ(t.gradient(mu), Vector::Zero(2));
}

TEST(Targets, BipMinimizerMatchesConjugateFormula) {
  const Vector y = vec({1.0, 1.0});
  const TargetDensity t = bip_target(identity_problem(2, 0.01, y));
  // Posterior precision I + 100 I, mean (100/101) y.
  const Vector expected = (100.0 / 101.0) * y;
  EXPECT_LT(t.gradient(expected).norm(), 1e-12);
  // Strict local minimum along a few directions.
  for (Index i = 0; i < 2; ++i) {
    Vector d = Vector::Zero(2);
    d(i) = 1e-3;
    EXPECT_GT(t.potential(expected + d), t.potential(expected));
    EXPECT_GT(t.potential(expected - d), t.potential(expected));
  }
}

TEST(Targets, BipGradientMatchesFiniteDifferences) {
  RandomStream rng(5);
  const Matrix g = rng.standard_normal(3, 4);
  Matrix r = rng.standard_normal(3, 3);
  r = r * r.transpose() + Matrix::Identity(3, 3);
  Matrix p0 = rng.standard_normal(4, 4);
  p0 = p0 * p0.transpose() + Matrix::Identity(4, 4);
  const auto problem = linear_gaussian_problem(g, rng.standard_normal(3, 1).col(0), r,
                                               rng.standard_normal(3, 1).col(0),
                                               rng.standard_normal(4, 1).col(0), p0);
  const TargetDensity t = bip_target(problem);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector u = rng.standard_normal(4, 1).col(0);
    const Vector exact = t.gradient(u);
    const Vector fd = central_difference(t, u, 1e-5);
    EXPECT_LE((fd - exact).norm(), 1e-5 * exact.norm());
  }
}

TEST(Targets, BipWithoutAdjointHasNoGradient) {
  GaussianInverseProblem p(
      1, [](const Vector& u) { return u; }, Matrix::Identity(1, 1), vec({0.0}), vec({0.0}),
      Matrix::Identity(1, 1));
  const TargetDensity t = bip_target(p);
  EXPECT_FALSE(t.has_gradient());
  EXPECT_THROW(t.gradient(vec({1.0})), ConfigError);
}

TEST(Targets, BipPotentialIsNonNegative) {
  RandomStream rng(6);
  const auto p = linear_gaussian_problem(rng.standard_normal(2, 3), Vector::Zero(2),
                                         Matrix::Identity(2, 2), vec({1.0, -1.0}),
                                         Vector::Zero(3), Matrix::Identity(3, 3));
  const TargetDensity t = bip_target(p);
  for (int i = 0; i < 50; ++i) EXPECT_GE(t.potential(5.0 * rng.standard_normal(3, 1).col(0)), 0.0);
}

TEST(Targets, LinearBipHasConstantHessian) {
  RandomStream rng(7);
  const auto p = linear_gaussian_problem(rng.standard_normal(3, 2), Vector::Zero(3),
                                         Matrix::Identity(3, 3), Vector::Ones(3),
                                         Vector::Zero(2), Matrix::Identity(2, 2));
  const TargetDensity t = bip_target(p);
  auto hessian = [&](const Vector& u) {
    Matrix h(2, 2);
    const double eps = 1e-3;
    for (Index i = 0; i < 2; ++i) {
      Vector up = u, dn = u;
      up(i) += eps;
      dn(i) -= eps;
      h.col(i) = (t.gradient(up) - t.gradient(dn)) / (2.0 * eps);
    }
    return h;
  };
  const Matrix h0 = hessian(Vector::Zero(2));
  for (int i = 0; i < 5; ++i) {
    EXPECT_LT((hessian(3.0 * rng.standard_normal(2, 1).col(0)) - h0).norm(), 1e-6);
  }
}

TEST(Targets, GaussianScalar) {
  const TargetDensity t = gaussian_target(vec({0.0}), Matrix::Identity(1, 1));
  EXPECT_DOUBLE_EQ(t.potential(vec({2.0})), 2.0);
  EXPECT_DOUBLE_EQ(t.gradient(vec({2.0}))(0), 2.0);
}

TEST(Targets, GaussianAtMean) {
  const Vector m = vec({1.0, -2.0});
  const TargetDensity t = gaussian_target(m, Matrix::Identity(2, 2));
  EXPECT_DOUBLE_EQ(t.potential(m), 0.0);
  EXPECT_EQ(t.gradient(m), Vector::Zero(2));
}

TEST(Targets, GaussianDiagonal) {
  Matrix p = Matrix::Zero(2, 2);
  p.diagonal() << 1, 4;
  const TargetDensity t = gaussian_target(Vector::Zero(2), p);
  EXPECT_DOUBLE_EQ(t.potential(vec({1.0, 1.0})), 2.5);
}

TEST(Targets, GaussianRejectsNonSpd) {
  Matrix p = Matrix::Identity(2, 2);
  p(1, 1) = -1.0;
  EXPECT_THROW(gaussian_target(Vector::Zero(2), p), InvalidInput);
}

TEST(Targets, PullbackGradientContract) {
  RandomStream rng(8);
  Matrix prec = rng.standard_normal(3, 3);
  prec = prec * prec.transpose() + Matrix::Identity(3, 3);
  const TargetDensity t = gaussian_target(rng.standard_normal(3, 1).col(0), prec);
  const AffineMap map(rng.standard_normal(3, 3) + 2.0 * Matrix::Identity(3, 3),
                      rng.standard_normal(3, 1).col(0));
  const TargetDensity pulled = pullback(t, map);
  for (int i = 0; i < 5; ++i) {
    const Vector v = rng.standard_normal(3, 1).col(0);
    const Vector expected = map.matrix().transpose() * t.gradient(map.apply(v));
    EXPECT_LT((pulled.gradient(v) - expected).norm(), 1e-10 * (1.0 + expected.norm()));
    EXPECT_NEAR(pulled.potential(v), t.potential(map.apply(v)), 1e-12);
  }
}

TEST(Targets, PullbackOfInverseProblemPreservesPotential) {
  RandomStream rng(9);
  const auto p = linear_gaussian_problem(rng.standard_normal(2, 3), Vector::Ones(2),
                                         0.5 * Matrix::Identity(2, 2), vec({0.2, 0.4}),
                                         rng.standard_normal(3, 1).col(0),
                                         2.0 * Matrix::Identity(3, 3));
  const AffineMap map(rng.standard_normal(3, 3) + 2.0 * Matrix::Identity(3, 3),
                      rng.standard_normal(3, 1).col(0));
  const TargetDensity original = bip_target(p);
  const TargetDensity pulled = bip_target(pullback(p, map));
  for (int i = 0; i < 5; ++i) {
    const Vector v = rng.standard_normal(3, 1).col(0);
    const double expected = original.potential(map.apply(v));
    EXPECT_NEAR(pulled.potential(v), expected, 1e-10 * (1.0 + expected));
  }
}

}  // namespace
}  // namespace aldi
