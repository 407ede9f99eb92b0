#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "aldi/diagnostics.hpp"
#include "aldi/errors.hpp"
#include "aldi/rng.hpp"

namespace aldi {
namespace {

// Record with snapshots at t = k*dt, k = 0..steps, produced by make(t).
template <typename F>
RunRecord synthetic(double dt, std::size_t steps, F make) {
  RunRecord r;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    r.snapshots.push_back(Snapshot{k, t, ParticleEnsemble(make(t))});
  }
  return r;
}

// D x N ensemble whose empirical covariance is exactly the identity.
Matrix identity_covariance_ensemble(Index dim, Index size, std::uint64_t seed) {
  RandomStream rng(seed);
  Matrix a = rng.standard_normal(size, size);
  a.col(0).setOnes();
  const Matrix q = Eigen::HouseholderQR<Matrix>(a).householderQ();
  return std::sqrt(static_cast<double>(size)) * q.middleCols(1, dim).transpose();
}

constexpr double kMesh50 = 2.0 * std::numbers::pi / 50.0;

TEST(Diagnostics, BiasZeroWhenMeanIsTruth) {
  RandomStream rng(1);
  const Vector truth = rng.standard_normal(3, 1).col(0);
  Matrix u(3, 2);
  const RunRecord r = synthetic(0.5, 8, [&](double t) {
    u.col(0) = truth + Vector::Constant(3, t);
    u.col(1) = truth - Vector::Constant(3, t);
    return u;
  });
  EXPECT_NEAR(bias(r, truth, WindowSpec{1.0, 2.0, 0.3}), 0.0, 1e-28);
}

TEST(Diagnostics, BiasOfConstantUnitOffset) {
  const Vector truth = Vector::Zero(50);
  Matrix u = Matrix::Zero(50, 3);
  u.row(4).setOnes();
  const RunRecord r = synthetic(0.01, 2000, [&](double) { return u; });
  EXPECT_NEAR(bias(r, truth, WindowSpec{12.0, 8.0, kMesh50}), kMesh50, 1e-12);
  EXPECT_NEAR(kMesh50, 0.12566, 1e-5);
}

TEST(Diagnostics, BiasRiemannSumConvergesAtFirstOrder) {
  const Vector truth = Vector::Zero(1);
  auto make = [](double t) { return Matrix::Constant(1, 1, std::sin(t)); };
  // (1/T) * integral of sin^2 over [0, 2], T = 2
  const double exact = 0.5 * (2.0 - std::sin(4.0) / 2.0) / 2.0;
  const WindowSpec w{0.0, 2.0, 1.0};
  const double e1 = std::abs(bias(synthetic(0.02, 100, make), truth, w) - exact);
  const double e2 = std::abs(bias(synthetic(0.01, 200, make), truth, w) - exact);
  EXPECT_LT(e1, 0.05);
  EXPECT_NEAR(e1 / e2, 2.0, 0.2);
}

TEST(Diagnostics, SpreadOfIdentityCovariance) {
  const Matrix u = identity_covariance_ensemble(50, 100, 2);
  ASSERT_LT((empirical_stats(ParticleEnsemble(u)).covariance - Matrix::Identity(50, 50)).norm(),
            1e-10);
  const RunRecord r = synthetic(0.01, 2000, [&](double) { return u; });
  EXPECT_NEAR(spread(r, WindowSpec{12.0, 8.0, kMesh50}), 2.0 * std::numbers::pi, 1e-9);
}

TEST(Diagnostics, SpreadOfCoincidentParticlesIsZero) {
  const RunRecord r = synthetic(0.1, 30, [](double t) { return Matrix::Constant(2, 4, t); });
  EXPECT_EQ(spread(r, WindowSpec{1.0, 2.0, 1.0}), 0.0);
}

TEST(Diagnostics, SpreadOfStaticEnsembleIndependentOfHorizon) {
  RandomStream rng(3);
  const Matrix u = rng.standard_normal(3, 6);
  const RunRecord r = synthetic(0.01, 2000, [&](double) { return u; });
  const double a = spread(r, WindowSpec{2.0, 3.0, 0.7});
  const double b = spread(r, WindowSpec{2.0, 15.0, 0.7});
  EXPECT_NEAR(a, b, 1e-12 * a);
}

TEST(Diagnostics, SpreadIsExplicitRiemannSum) {
  RandomStream rng(4);
  const RunRecord r = synthetic(0.1, 40, [&](double) { return rng.standard_normal(2, 5); });
  const WindowSpec w{1.0, 2.0, 0.5};
  double total = 0.0;
  for (const auto& s : r.snapshots) {
    if (s.time > 1.0 - 1e-9 && s.time < 3.0 - 1e-9) {
      total += empirical_stats(s.ensemble).covariance.trace();
    }
  }
  EXPECT_NEAR(spread(r, w), 0.5 / 2.0 * 0.1 * total, 1e-12);
}

TEST(Diagnostics, MetricsArePermutationInvariant) {
  RandomStream rng(5);
  const RunRecord r = synthetic(0.1, 40, [&](double) { return rng.standard_normal(3, 6); });
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(6);
  perm.indices() << 5, 2, 0, 1, 4, 3;
  RunRecord p = r;
  for (auto& s : p.snapshots) s.ensemble = ParticleEnsemble(s.ensemble.states() * perm);
  const Vector truth = Vector::Ones(3);
  const WindowSpec w{1.0, 2.0, 1.0};
  EXPECT_NEAR(bias(p, truth, w), bias(r, truth, w), 1e-13);
  EXPECT_NEAR(spread(p, w), spread(r, w), 1e-13);
  const PooledMoments a = pooled_moments(r, 0.5), b = pooled_moments(p, 0.5);
  EXPECT_LT((a.mean - b.mean).norm(), 1e-14);
  EXPECT_LT((a.covariance - b.covariance).norm(), 1e-13);
}

TEST(Diagnostics, BiasInvariantUnderOrthogonalBasisChange) {
  RandomStream rng(6);
  const RunRecord r = synthetic(0.1, 40, [&](double) { return rng.standard_normal(3, 4); });
  const Matrix q = Eigen::HouseholderQR<Matrix>(rng.standard_normal(3, 3)).householderQ();
  RunRecord rotated = r;
  for (auto& s : rotated.snapshots) s.ensemble = ParticleEnsemble(q * s.ensemble.states());
  const Vector truth = rng.standard_normal(3, 1).col(0);
  const WindowSpec w{1.0, 2.0, 1.0};
  EXPECT_NEAR(bias(rotated, q * truth, w), bias(r, truth, w), 1e-12);
}

TEST(Diagnostics, WindowMustBeCovered) {
  const RunRecord r = synthetic(0.1, 10, [](double) { return Matrix::Zero(1, 2); });
  EXPECT_THROW(spread(r, WindowSpec{0.5, 1.0, 1.0}), InvalidInput);
  EXPECT_THROW(bias(r, Vector::Zero(2), WindowSpec{0.0, 1.0, 1.0}), InvalidInput);
  EXPECT_THROW(spread(r, WindowSpec{0.0, 0.0, 1.0}), InvalidInput);
  EXPECT_NO_THROW(spread(r, WindowSpec{0.0, 1.0, 1.0}));
}

TEST(Diagnostics, PooledSingleParticle) {
  RunRecord r;
  r.snapshots.push_back(Snapshot{0, 0.0, ParticleEnsemble(Matrix::Constant(2, 1, 1.5))});
  const PooledMoments m = pooled_moments(r, 0.0);
  EXPECT_EQ(m.mean, Vector::Constant(2, 1.5));
  EXPECT_EQ(m.covariance, Matrix::Zero(2, 2));
  EXPECT_EQ(m.count, 1u);
  EXPECT_THROW(pooled_moments(r, 1.0), InvalidInput);
}

TEST(Diagnostics, PooledMomentsOfIidNormals) {
  RandomStream rng(7);
  const RunRecord r = synthetic(1.0, 1000, [&](double) { return rng.standard_normal(2, 10); });
  const PooledMoments m = pooled_moments(r, 0.0);
  const double n = static_cast<double>(m.count);
  EXPECT_EQ(m.count, 10010u);
  for (Index i = 0; i < 2; ++i) {
    EXPECT_NEAR(m.mean(i), 0.0, 3.0 / std::sqrt(n));
    EXPECT_NEAR(m.covariance(i, i), 1.0, 3.0 * std::sqrt(2.0 / n));
  }
  EXPECT_NEAR(m.covariance(0, 1), 0.0, 3.0 / std::sqrt(n));
}

TEST(Diagnostics, SubspaceResidualExamples) {
  Matrix basis(2, 1);
  basis << 1, 0;
  Matrix u(2, 1);
  u << 0, 3;
  EXPECT_DOUBLE_EQ(subspace_residual(ParticleEnsemble(u), basis, Vector::Zero(2)), 3.0);

  RandomStream rng(8);
  const Matrix b = Eigen::HouseholderQR<Matrix>(rng.standard_normal(5, 2)).householderQ() *
                   Matrix::Identity(5, 2);
  const Vector anchor = rng.standard_normal(5, 1).col(0);
  Matrix inside = b * rng.standard_normal(2, 4);
  inside.colwise() += anchor;
  EXPECT_LE(subspace_residual(ParticleEnsemble(inside), b, anchor), 1e-13 * 10);

  const Matrix random = rng.standard_normal(5, 6);
  Matrix projected = b * (b.transpose() * (random.colwise() - anchor));
  projected.colwise() += anchor;
  EXPECT_LE(subspace_residual(ParticleEnsemble(projected), b, anchor), 1e-12);
}

TEST(Diagnostics, SubspaceResidualRejectsNonOrthonormalBasis) {
  Matrix basis(2, 1);
  basis << 1, 1;
  EXPECT_THROW(subspace_residual(ParticleEnsemble(Matrix::Zero(2, 1)), basis, Vector::Zero(2)),
               InvalidInput);
}

}  // namespace
}  // namespace aldi
