#pragma once

#include "aldi/ensemble.hpp"
#include "aldi/samplers.hpp"

namespace aldi {

/// Time window [tau, tau + horizon) and the mesh width that scales both
/// benchmark metrics.
struct WindowSpec {
  double tau = 12.0;
  double horizon = 8.0;
  double mesh_h = 1.0;

  void validate() const;
};

/// (h/T) sum_{t_k in window} |m(U_{t_k}) - truth|^2 dt_k, left Riemann sum
/// with dt_k the spacing to the next recorded snapshot.
double bias(const RunRecord& record, const Vector& truth, const WindowSpec& window);

/// (h/T) sum_{t_k in window} trace C(U_{t_k}) dt_k.
double spread(const RunRecord& record, const WindowSpec& window);

struct PooledMoments {
  Vector mean;
  Matrix covariance;
  std::size_t count = 0;
};

/// Mean and covariance over every particle of every snapshot with
/// time >= burn_in_time (1/count convention).
PooledMoments pooled_moments(const RunRecord& record, double burn_in_time);

/// max_i |(I - B B^T)(u_i - anchor)| for an orthonormal basis B (D x r).
double subspace_residual(const ParticleEnsemble& ens, const Matrix& basis, const Vector& anchor);

}  // namespace aldi
