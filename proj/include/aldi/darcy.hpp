#pragma once

#include <cstdint>

#include "aldi/ensemble.hpp"
#include "aldi/targets.hpp"

namespace aldi::darcy {

/// Periodic 1-D elliptic model -(a p')' = f on [0, 2 pi) discretized with D
/// nodes x_i = 2 pi i / D. Edge k (between nodes k and k+1 mod D) carries the
/// coefficient a = exp(u_k). Observations are p at nodes (D/K) j mod D,
/// j = 1..K.
struct DarcyModel {
  Index grid_size = 50;
  Index obs_count = 10;
  double noise_var = 1e-4;
  double prior_mu = 100.0;
  Vector forcing;

  double mesh() const;
  double node(Index i) const;
  /// Node index observed by observation j (0-based j, so j = 0 is node D/K).
  Index obs_node(Index j) const;

  /// Throws InvalidInput if D is not divisible by K or the forcing is not
  /// mean-zero.
  void validate() const;
};

/// Model with the Gaussian-bump forcing f_i = exp(-(2 x_i - 2 pi)^2 / 40) - c_f,
/// c_f chosen so the forcing sums to zero.
DarcyModel standard_model(Index grid_size = 50, Index obs_count = 10,
                          double noise_var = 1e-4, double prior_mu = 100.0);

/// Log-permeability u, one value per edge.
struct DarcyField {
  Vector log_perm;
};

/// Zero-mean solution of the periodic diffusion problem
///   (a_{i+1/2}(p_{i+1} - p_i) - a_{i-1/2}(p_i - p_{i-1})) / h^2 = rhs_i - lambda,
/// lambda = mean(rhs) being the multiplier of the sum-zero constraint.
/// Tridiagonal elimination with node 0 pinned, then shifted to zero mean; O(D).
Vector solve_periodic(const Vector& edge_coeff, double mesh, const Vector& rhs);

/// Same system assembled as the dense bordered (D+1) x (D+1) matrix
/// [L 1; 1^T 0] and solved by LU. Reference path for the O(D) solver.
Vector solve_periodic_dense(const Vector& edge_coeff, double mesh, const Vector& rhs);

/// Periodic second-difference operator with edge coefficients, as a dense
/// D x D matrix (the left-hand side of the pressure equation).
Matrix diffusion_matrix(const Vector& edge_coeff, double mesh);

Vector solve_pressure(const DarcyModel& model, const DarcyField& field);
Vector forward_map(const DarcyModel& model, const DarcyField& field);

/// (dG/du)^T w by one forward and one adjoint solve.
Vector forward_adjoint_action(const DarcyModel& model, const DarcyField& field,
                              const Vector& weights);

/// Gradient of 1/2 |y_obs - G(u)|^2_R with R = noise_var I, via the adjoint.
Vector misfit_gradient_adjoint(const DarcyModel& model, const DarcyField& field,
                               const Vector& y_obs);

/// 4 h ((mu/D) 1 1^T - Delta_h)^2 with Delta_h the periodic second difference.
Matrix build_prior_precision(const DarcyModel& model);

/// count independent draws from N(0, precision^{-1}) via its eigendecomposition.
ParticleEnsemble sample_prior(const DarcyModel& model, const Matrix& precision, Index count,
                              std::uint64_t seed);

struct TruthAndData {
  DarcyField truth;
  Vector y_obs;
};

/// u_i = 1/2 sin(x_i + h/2) for the edge following node i, and
/// y_j = p_{l(j)} + eta_j with eta_j ~ N(0, noise_var).
TruthAndData make_truth_and_data(const DarcyModel& model, std::uint64_t seed,
                                 bool add_noise = true);

/// The benchmark posterior as a Gaussian inverse problem (prior mean zero,
/// R = noise_var I) carrying the adjoint action.
GaussianInverseProblem make_inverse_problem(const DarcyModel& model, const Vector& y_obs,
                                            const Matrix& prior_precision);

}  // namespace aldi::darcy
