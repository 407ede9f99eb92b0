#include <gtest/gtest.h>

#include <cmath>

#include "aldi/ensemble.hpp"
#include "aldi/errors.hpp"
#include "aldi/rng.hpp"

namespace aldi {
namespace {

Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  RandomStream rng(seed);
  return rng.standard_normal(rows, cols);
}

Matrix three_points() {
  Matrix u(2, 3);
  u << 1, -1, 0,
       0, 0, 0;
  return u;
}

TEST(Ensemble, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(ParticleEnsemble(Matrix(0, 3)), InvalidInput);
  EXPECT_THROW(ParticleEnsemble(Matrix(2, 0)), InvalidInput);
  Matrix u = Matrix::Zero(2, 2);
  u(1, 1) = std::nan("");
  try {
    ParticleEnsemble bad(u);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    ASSERT_TRUE(e.particle().has_value());
    EXPECT_EQ(*e.particle(), 1);
  }
}

TEST(Ensemble, MeanOfSymmetricColumnsIsZero) {
  const Vector m = empirical_mean(ParticleEnsemble(three_points()));
  EXPECT_DOUBLE_EQ(m(0), 0.0);
  EXPECT_DOUBLE_EQ(m(1), 0.0);
}

TEST(Ensemble, MeanOfSingleParticle) {
  Matrix u(2, 1);
  u << 3, 4;
  const Vector m = empirical_mean(ParticleEnsemble(u));
  EXPECT_DOUBLE_EQ(m(0), 3.0);
  EXPECT_DOUBLE_EQ(m(1), 4.0);
}

TEST(Ensemble, MeanOfStandardNormalsWithinMonteCarloBound) {
  const Vector m = empirical_mean(ParticleEnsemble(random_matrix(3, 100, 11)));
  for (Index i = 0; i < m.size(); ++i) EXPECT_LT(std::abs(m(i)), 5.0 / std::sqrt(100.0));
}

TEST(Ensemble, CovarianceOfThreePoints) {
  const EnsembleStats s = empirical_stats(ParticleEnsemble(three_points()));
  Matrix expected(2, 2);
  expected << 2.0 / 3.0, 0, 0, 0;
  EXPECT_LT((s.covariance - expected).norm(), 1e-15);
}

TEST(Ensemble, CoincidentParticlesHaveZeroCovariance) {
  Matrix u(2, 4);
  u.colwise() = Vector::Constant(2, 1.5);
  const EnsembleStats s = empirical_stats(ParticleEnsemble(u));
  EXPECT_EQ(s.covariance, Matrix::Zero(2, 2));
  EXPECT_EQ(s.sqrt_factor, Matrix::Zero(2, 4));
}

TEST(Ensemble, CovarianceFactorsThroughSqrtFactor) {
  const EnsembleStats s = empirical_stats(ParticleEnsemble(random_matrix(3, 10, 12)));
  const Matrix product = s.sqrt_factor * s.sqrt_factor.transpose();
  EXPECT_LT((s.covariance - product).norm(), 1e-12);
  EXPECT_LT(s.deviations.rowwise().sum().norm(), 1e-12);
}

TEST(Ensemble, CrossCovarianceOfIdentityIsCovariance) {
  const ParticleEnsemble ens(random_matrix(3, 7, 13));
  const Matrix d = cross_covariance(ens, ens.states());
  EXPECT_LT((d - empirical_stats(ens).covariance).norm(), 1e-13);
}

TEST(Ensemble, CrossCovarianceOfConstantMapIsZero) {
  const ParticleEnsemble ens(random_matrix(3, 7, 14));
  const Matrix images = Matrix::Constant(2, 7, 4.0);
  EXPECT_EQ(cross_covariance(ens, images), Matrix::Zero(3, 2));
}

TEST(Ensemble, CrossCovarianceOfLinearMap) {
  const ParticleEnsemble ens(random_matrix(3, 9, 15));
  const Matrix g = random_matrix(4, 3, 16);
  const Matrix d = cross_covariance(ens, g * ens.states());
  const Matrix expected = empirical_stats(ens).covariance * g.transpose();
  EXPECT_LT((d - expected).norm(), 1e-12 * (1.0 + expected.norm()));
}

TEST(Ensemble, CrossCovarianceRejectsShapeMismatch) {
  const ParticleEnsemble ens(random_matrix(3, 5, 17));
  EXPECT_THROW(cross_covariance(ens, Matrix::Zero(2, 4)), InvalidInput);
}

TEST(Ensemble, AffineIdentityLeavesEnsembleUnchanged) {
  const ParticleEnsemble ens(random_matrix(3, 5, 18));
  const AffineMap id(Matrix::Identity(3, 3), Vector::Zero(3));
  EXPECT_EQ(apply_affine(ens, id), ens);
}

TEST(Ensemble, AffineScalar) {
  Matrix u(1, 1);
  u << 3;
  Matrix m(1, 1);
  m << 2;
  Vector b(1);
  b << 1;
  const ParticleEnsemble out = apply_affine(ParticleEnsemble(u), AffineMap(m, b));
  EXPECT_DOUBLE_EQ(out.states()(0, 0), 7.0);
}

TEST(Ensemble, AffineRoundTrip) {
  const ParticleEnsemble ens(random_matrix(4, 6, 19));
  const AffineMap map(random_matrix(4, 4, 20) + 3.0 * Matrix::Identity(4, 4),
                      random_matrix(4, 1, 21).col(0));
  const ParticleEnsemble back = apply_affine(apply_affine(ens, map), map.inverse());
  EXPECT_LT((back.states() - ens.states()).norm(), 1e-12 * ens.states().norm());
}

TEST(Ensemble, AffineRejectsSingularMatrix) {
  EXPECT_THROW(AffineMap(Matrix::Zero(2, 2), Vector::Zero(2)), InvalidInput);
  EXPECT_THROW(AffineMap(Matrix::Identity(2, 2), Vector::Zero(3)), InvalidInput);
}

TEST(Ensemble, CovarianceTransformsCongruently) {
  const ParticleEnsemble ens(random_matrix(3, 8, 22));
  const AffineMap map(random_matrix(3, 3, 23) + 2.0 * Matrix::Identity(3, 3),
                      random_matrix(3, 1, 24).col(0));
  const EnsembleStats before = empirical_stats(ens);
  const EnsembleStats after = empirical_stats(apply_affine(ens, map));
  const Matrix expected = map.matrix() * before.covariance * map.matrix().transpose();
  EXPECT_LT((after.covariance - expected).norm(), 1e-12 * expected.norm());
  const Matrix sqrt_expected = map.matrix() * before.sqrt_factor;
  EXPECT_LT((after.sqrt_factor - sqrt_expected).norm(), 1e-13 * sqrt_expected.norm() * 10);
}

TEST(Ensemble, MinEigenvalueOfSimpleMatrices) {
  EXPECT_NEAR(min_eigenvalue_sym(Matrix::Identity(3, 3)), 1.0, 1e-15);
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 2, 3;
  EXPECT_NEAR(min_eigenvalue_sym(d), 2.0, 1e-15);
}

TEST(Ensemble, MinEigenvalueMatchesInverseIteration) {
  const Matrix a = random_matrix(5, 5, 25);
  const Matrix spd = a * a.transpose() + 0.1 * Matrix::Identity(5, 5);
  // Independent oracle: power iteration on (spd)^{-1}.
  const Eigen::LLT<Matrix> llt(spd);
  Vector v = Vector::Ones(5);
  double lambda = 0.0;
  for (int it = 0; it < 5000; ++it) {
    Vector w = llt.solve(v);
    lambda = 1.0 / w.norm() * v.norm();
    v = w.normalized();
  }
  lambda = v.dot(spd * v);
  EXPECT_NEAR(min_eigenvalue_sym(spd), lambda, 1e-8 * (1.0 + spd.norm()));
}

TEST(Ensemble, MinEigenvalueRejectsAsymmetric) {
  Matrix a = Matrix::Identity(2, 2);
  a(0, 1) = 0.5;
  EXPECT_THROW(min_eigenvalue_sym(a), InvalidInput);
}

TEST(Ensemble, CovarianceIsPositiveSemidefinite) {
  for (std::uint64_t seed = 30; seed < 40; ++seed) {
    const EnsembleStats s = empirical_stats(ParticleEnsemble(random_matrix(4, 6, seed)));
    EXPECT_GE(min_eigenvalue_sym(s.covariance), -1e-12 * s.covariance.trace());
  }
}

TEST(Ensemble, CovarianceRankIsAtMostNMinusOne) {
  const EnsembleStats s = empirical_stats(ParticleEnsemble(random_matrix(5, 3, 41)));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(s.covariance);
  const Vector ev = eig.eigenvalues();  // ascending
  EXPECT_LE(std::abs(ev(2)), 1e-10 * ev(4));
  EXPECT_GT(ev(3), 1e-6 * ev(4));
}

TEST(Ensemble, SymmetricSqrtSquaresBack) {
  const Matrix a = random_matrix(4, 4, 42);
  const Matrix spd = a * a.transpose() + Matrix::Identity(4, 4);
  const Matrix r = symmetric_sqrt(spd);
  EXPECT_LT((r * r - spd).norm(), 1e-10 * spd.norm());
  EXPECT_LT((r - r.transpose()).norm(), 1e-12);
}

}  // namespace
}  // namespace aldi
