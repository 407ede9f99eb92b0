#include "aldi/ensemble.hpp"

#include <cmath>
#include <string>

#include "aldi/errors.hpp"

namespace aldi {

NumericError::NumericError(const std::string& what,
                           std::optional<std::ptrdiff_t> particle,
                           std::optional<std::size_t> step)
    : std::runtime_error([&] {
        std::string msg = what;
        if (particle) msg += " (particle " + std::to_string(*particle) + ")";
        if (step) msg += " (step " + std::to_string(*step) + ")";
        return msg;
      }()),
      detail_(what),
      particle_(particle),
      step_(step) {}

NumericError NumericError::at_particle(std::ptrdiff_t particle) const {
  return NumericError(detail_, particle, step_);
}

NumericError NumericError::at_step(std::size_t step) const {
  return NumericError(detail_, particle_, step);
}

ParticleEnsemble::ParticleEnsemble(Matrix states) : states_(std::move(states)) {
  if (states_.rows() < 1 || states_.cols() < 1) {
    throw InvalidInput("ParticleEnsemble: need at least one dimension and one particle");
  }
  for (Index i = 0; i < states_.cols(); ++i) {
    if (!states_.col(i).allFinite()) {
      throw NumericError("ParticleEnsemble: non-finite particle state", i);
    }
  }
}

AffineMap::AffineMap(Matrix matrix, Vector shift)
    : matrix_(std::move(matrix)), shift_(std::move(shift)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() < 1) {
    throw InvalidInput("AffineMap: matrix must be square and non-empty");
  }
  if (shift_.size() != matrix_.rows()) {
    throw InvalidInput("AffineMap: shift length must match matrix size");
  }
  lu_.compute(matrix_);
  const double det = lu_.determinant();
  if (!std::isfinite(det) || det == 0.0 ||
      lu_.rcond() < 1e3 * Eigen::NumTraits<double>::epsilon()) {
    throw InvalidInput("AffineMap: matrix is singular");
  }
}

AffineMap AffineMap::inverse() const {
  Matrix inv = lu_.inverse();
  Vector shift = -(inv * shift_);
  return AffineMap(std::move(inv), std::move(shift));
}

Vector empirical_mean(const ParticleEnsemble& ens) {
  return ens.states().rowwise().mean();
}

EnsembleStats empirical_stats(const ParticleEnsemble& ens) {
  const double n = static_cast<double>(ens.size());
  EnsembleStats s;
  s.mean = empirical_mean(ens);
  s.deviations = ens.states().colwise() - s.mean;
  s.sqrt_factor = s.deviations / std::sqrt(n);
  Matrix c = (s.deviations * s.deviations.transpose()) / n;
  s.covariance = 0.5 * (c + c.transpose());
  return s;
}

Matrix cross_covariance(const ParticleEnsemble& ens, const Matrix& images) {
  if (images.cols() != ens.size()) {
    throw InvalidInput("cross_covariance: images must have one column per particle (got " +
                       std::to_string(images.cols()) + ", expected " +
                       std::to_string(ens.size()) + ")");
  }
  const double n = static_cast<double>(ens.size());
  const Matrix dev = ens.states().colwise() - empirical_mean(ens);
  const Vector image_mean = images.rowwise().mean();
  const Matrix image_dev = images.colwise() - image_mean;
  return (dev * image_dev.transpose()) / n;
}

ParticleEnsemble apply_affine(const ParticleEnsemble& ens, const AffineMap& map) {
  if (map.dim() != ens.dim()) {
    throw InvalidInput("apply_affine: map dimension does not match ensemble");
  }
  Matrix out = map.matrix() * ens.states();
  out.colwise() += map.shift();
  return ParticleEnsemble(std::move(out));
}

double min_eigenvalue_sym(const Matrix& mat) {
  if (mat.rows() != mat.cols() || mat.rows() < 1) {
    throw InvalidInput("min_eigenvalue_sym: matrix must be square and non-empty");
  }
  const double scale = std::max(1.0, mat.cwiseAbs().maxCoeff());
  if ((mat - mat.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw InvalidInput("min_eigenvalue_sym: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(mat, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) {
    throw NumericError("min_eigenvalue_sym: eigendecomposition failed");
  }
  return eig.eigenvalues()(0);
}

Matrix symmetric_sqrt(const Matrix& mat) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(mat);
  if (eig.info() != Eigen::Success) {
    throw NumericError("symmetric_sqrt: eigendecomposition failed");
  }
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace aldi
