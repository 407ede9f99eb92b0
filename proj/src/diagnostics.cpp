#include "aldi/diagnostics.hpp"

#include <cmath>

#include "aldi/errors.hpp"

namespace aldi {

namespace {

double time_tolerance(const WindowSpec& w) { return 1e-9 * std::max(1.0, w.tau + w.horizon); }

// Left Riemann sum of integrand(snapshot) over the window.
template <typename F>
double window_average(const RunRecord& record, const WindowSpec& window, F integrand) {
  window.validate();
  const auto& snaps = record.snapshots;
  const double eps = time_tolerance(window);
  const double end = window.tau + window.horizon;
  if (snaps.empty() || snaps.front().time > window.tau + eps || snaps.back().time < end - eps) {
    throw InvalidInput("metric window [" + std::to_string(window.tau) + ", " +
                       std::to_string(end) + "] is not covered by the record");
  }
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < snaps.size(); ++k) {
    const double t = snaps[k].time;
    if (t < window.tau - eps || t >= end - eps) continue;
    total += integrand(snaps[k].ensemble) * (snaps[k + 1].time - t);
  }
  return window.mesh_h / window.horizon * total;
}

}  // namespace

void WindowSpec::validate() const {
  if (!(tau >= 0.0)) throw InvalidInput("WindowSpec: tau must be non-negative");
  if (!(horizon > 0.0)) throw InvalidInput("WindowSpec: horizon must be positive");
}

double bias(const RunRecord& record, const Vector& truth, const WindowSpec& window) {
  if (!record.snapshots.empty() && truth.size() != record.snapshots.front().ensemble.dim()) {
    throw InvalidInput("bias: truth length does not match ensemble dimension");
  }
  return window_average(record, window, [&](const ParticleEnsemble& ens) {
    return (empirical_mean(ens) - truth).squaredNorm();
  });
}

double spread(const RunRecord& record, const WindowSpec& window) {
  return window_average(record, window, [](const ParticleEnsemble& ens) {
    const Matrix dev = ens.states().colwise() - empirical_mean(ens);
    return dev.squaredNorm() / static_cast<double>(ens.size());
  });
}

PooledMoments pooled_moments(const RunRecord& record, double burn_in_time) {
  PooledMoments out;
  Index dim = 0;
  for (const auto& s : record.snapshots) {
    if (s.time < burn_in_time) continue;
    if (out.count == 0) {
      dim = s.ensemble.dim();
      out.mean = Vector::Zero(dim);
    }
    out.mean += s.ensemble.states().rowwise().sum();
    out.count += static_cast<std::size_t>(s.ensemble.size());
  }
  if (out.count == 0) throw InvalidInput("pooled_moments: no snapshots after burn-in");
  out.mean /= static_cast<double>(out.count);
  out.covariance = Matrix::Zero(dim, dim);
  for (const auto& s : record.snapshots) {
    if (s.time < burn_in_time) continue;
    const Matrix dev = s.ensemble.states().colwise() - out.mean;
    out.covariance.noalias() += dev * dev.transpose();
  }
  out.covariance /= static_cast<double>(out.count);
  out.covariance = (0.5 * (out.covariance + out.covariance.transpose())).eval();
  return out;
}

double subspace_residual(const ParticleEnsemble& ens, const Matrix& basis, const Vector& anchor) {
  if (basis.rows() != ens.dim() || anchor.size() != ens.dim()) {
    throw InvalidInput("subspace_residual: basis/anchor dimension mismatch");
  }
  const Matrix gram = basis.transpose() * basis;
  if ((gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() > 1e-10) {
    throw InvalidInput("subspace_residual: basis columns are not orthonormal");
  }
  const Matrix shifted = ens.states().colwise() - anchor;
  const Matrix residual = shifted - basis * (basis.transpose() * shifted);
  return residual.colwise().norm().maxCoeff();
}

}  // namespace aldi
