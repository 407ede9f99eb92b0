#pragma once

#include <Eigen/Dense>

namespace aldi {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// D x N particle states, one particle per column.
///
/// Construction rejects empty shapes and non-finite entries, so every
/// ensemble in circulation satisfies both invariants.
class ParticleEnsemble {
 public:
  explicit ParticleEnsemble(Matrix states);

  Index dim() const { return states_.rows(); }
  Index size() const { return states_.cols(); }

  const Matrix& states() const { return states_; }
  auto particle(Index i) const { return states_.col(i); }

  bool operator==(const ParticleEnsemble& other) const {
    return states_.rows() == other.states_.rows() &&
           states_.cols() == other.states_.cols() && states_ == other.states_;
  }

 private:
  Matrix states_;
};

/// Empirical moments of one ensemble snapshot, 1/N convention throughout.
struct EnsembleStats {
  Vector mean;         // m(U)
  Matrix deviations;   // U' = U - m 1^T
  Matrix covariance;   // (1/N) U' U'^T
  Matrix sqrt_factor;  // U' / sqrt(N), so covariance = sqrt_factor sqrt_factor^T
};

/// u -> M u + b with M invertible.
class AffineMap {
 public:
  AffineMap(Matrix matrix, Vector shift);

  const Matrix& matrix() const { return matrix_; }
  const Vector& shift() const { return shift_; }
  Index dim() const { return matrix_.rows(); }

  Vector apply(const Vector& u) const { return matrix_ * u + shift_; }
  AffineMap inverse() const;

 private:
  Matrix matrix_;
  Vector shift_;
  Eigen::PartialPivLU<Matrix> lu_;
};

Vector empirical_mean(const ParticleEnsemble& ens);
EnsembleStats empirical_stats(const ParticleEnsemble& ens);

/// (1/N) sum_i (u_i - m(U)) (g_i - m(G))^T where column i of `images` is G(u_i).
Matrix cross_covariance(const ParticleEnsemble& ens, const Matrix& images);

ParticleEnsemble apply_affine(const ParticleEnsemble& ens, const AffineMap& map);

/// Smallest eigenvalue of a symmetric matrix. Throws InvalidInput if the
/// matrix is asymmetric beyond 1e-10 relative to its largest entry.
double min_eigenvalue_sym(const Matrix& mat);

/// Symmetric positive semidefinite square root S with S S = mat.
Matrix symmetric_sqrt(const Matrix& mat);

}  // namespace aldi
