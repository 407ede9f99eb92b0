#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "aldi/ensemble.hpp"

namespace aldi {

/// Un-normalized density exp(-potential(u)) on R^D with an optional gradient.
///
/// Evaluation is const and must not mutate shared state, so one target may be
/// evaluated concurrently on distinct points.
class TargetDensity {
 public:
  using Potential = std::function<double(const Vector&)>;
  using Gradient = std::function<Vector(const Vector&)>;

  TargetDensity(Index dim, Potential potential, Gradient gradient = nullptr);

  Index dim() const { return dim_; }
  bool has_gradient() const { return static_cast<bool>(gradient_); }

  double potential(const Vector& u) const;
  /// Throws ConfigError when the target carries no gradient.
  Vector gradient(const Vector& u) const;

 private:
  Index dim_;
  Potential potential_;
  Gradient gradient_;
};

/// Phi(u) = 1/2 (u - mean)^T precision (u - mean).
TargetDensity gaussian_target(Vector mean, Matrix precision);

/// v -> Phi(M v + b), with gradient M^T grad Phi(M v + b).
TargetDensity pullback(const TargetDensity& target, const AffineMap& map);

/// Bayesian inverse problem y_obs = G(u) + noise, noise ~ N(0, R),
/// prior N(mu0, P0).
///
/// The noise covariance and prior precision are Cholesky-factorized once at
/// construction; both must be symmetric positive definite.
class GaussianInverseProblem {
 public:
  using ForwardMap = std::function<Vector(const Vector&)>;
  /// (u, w) -> (dG/du)^T w.
  using AdjointAction = std::function<Vector(const Vector&, const Vector&)>;

  GaussianInverseProblem(Index dim, ForwardMap forward, Matrix noise_cov, Vector obs,
                         Vector prior_mean, Matrix prior_precision,
                         AdjointAction forward_gradient_adjoint = nullptr);

  Index dim() const { return dim_; }
  Index obs_dim() const { return obs_.size(); }

  const Matrix& noise_cov() const { return noise_cov_; }
  const Vector& obs() const { return obs_; }
  const Vector& prior_mean() const { return prior_mean_; }
  const Matrix& prior_precision() const { return prior_precision_; }
  bool has_adjoint() const { return static_cast<bool>(adjoint_); }

  /// G(u); throws NumericError if the output is non-finite or mis-sized.
  Vector forward(const Vector& u) const;
  /// (dG/du)^T w; throws ConfigError when no adjoint was supplied.
  Vector adjoint_action(const Vector& u, const Vector& w) const;

  /// R^{-1} r, column-wise when r is a matrix.
  Matrix noise_precision_apply(const Matrix& r) const;

  /// 1/2 |u - mu0|^2_{P0} = 1/2 (u - mu0)^T P0^{-1} (u - mu0).
  double prior_penalty(const Vector& u) const;

  /// Raw callables, for building transformed problems.
  const ForwardMap& forward_map() const { return forward_; }
  const AdjointAction& adjoint() const { return adjoint_; }

 private:
  Index dim_;
  ForwardMap forward_;
  AdjointAction adjoint_;
  Matrix noise_cov_;
  Eigen::LLT<Matrix> noise_llt_;
  Vector obs_;
  Vector prior_mean_;
  Matrix prior_precision_;
};

/// 1/2 (y - G(u))^T R^{-1} (y - G(u)).
double misfit(const GaussianInverseProblem& problem, const Vector& u);

/// Target with potential misfit + prior penalty. The gradient is present only
/// when the problem supplies an adjoint action.
TargetDensity bip_target(const GaussianInverseProblem& problem);

/// Problem in coordinates v with u = M v + b: forward v -> G(M v + b), prior
/// mean M^{-1}(mu0 - b), prior precision M^T P0^{-1} M.
GaussianInverseProblem pullback(const GaussianInverseProblem& problem, const AffineMap& map);

/// Forward map G(u) = G u + c with exact adjoint.
GaussianInverseProblem linear_gaussian_problem(Matrix forward_matrix, Vector offset,
                                               Matrix noise_cov, Vector obs,
                                               Vector prior_mean, Matrix prior_precision);

/// Throws InvalidInput unless `mat` is symmetric with a successful Cholesky
/// factorization and strictly positive smallest eigenvalue.
void require_spd(const Matrix& mat, const char* what);

}  // namespace aldi
