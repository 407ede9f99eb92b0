#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aldi/ensemble.hpp"
#include "aldi/targets.hpp"

namespace aldi {

enum class SamplerFamily {
  aldi,
  eks,
  aldi_gradient_free,
  eks_gradient_free,
  langevin_const,
  enkbf,
  enkbf_gradient_free,
  eki,
};

std::string_view to_string(SamplerFamily family);
std::optional<SamplerFamily> parse_family(std::string_view name);

bool is_gradient_free(SamplerFamily family);
/// Families without a diffusion term (EnKBF and EKI).
bool is_deterministic(SamplerFamily family);
/// Families that evolve through the empirical covariance.
bool is_interacting(SamplerFamily family);

/// Which square root of the empirical covariance drives the noise.
/// `generalized` uses the D x N deviation factor with N-dimensional
/// increments; `symmetric` uses the D x D symmetric root with D-dimensional
/// increments (the original EKS construction).
enum class NoiseRoot { generalized, symmetric };

struct SamplerConfig {
  SamplerFamily family = SamplerFamily::aldi;
  double step_size = 0.01;
  std::size_t num_steps = 0;
  std::uint64_t seed = 0;
  /// Required for langevin_const only.
  std::optional<Matrix> const_preconditioner;
  /// Adds jitter * I to the covariance preconditioner and isotropic noise of
  /// matching scale. Off by default.
  double jitter = 0.0;
  NoiseRoot noise_root = NoiseRoot::generalized;
  /// Multiplier on the (D+1)/N correction of the ALDI families.
  double correction_scale = 1.0;

  /// Throws InvalidInput/ConfigError for invalid or incompatible settings.
  void validate(Index dim) const;
};

/// Either a plain target density or a Gaussian inverse problem (which also
/// induces a target density).
class SamplingProblem {
 public:
  SamplingProblem(TargetDensity target);         // NOLINT(google-explicit-constructor)
  SamplingProblem(GaussianInverseProblem problem);  // NOLINT(google-explicit-constructor)

  Index dim() const { return target_.dim(); }
  const TargetDensity& target() const { return target_; }
  bool has_inverse_problem() const { return inverse_.has_value(); }
  /// Throws ConfigError if this problem is a bare target.
  const GaussianInverseProblem& inverse_problem() const;

 private:
  TargetDensity target_;
  std::optional<GaussianInverseProblem> inverse_;
};

struct DriftOptions {
  bool correction = true;
  double correction_scale = 1.0;
  double jitter = 0.0;
};

/// Column i: -C(U) grad Phi(u_i) + [correction] (D+1)/N (u_i - m(U)).
Matrix aldi_drift(const ParticleEnsemble& ens, const EnsembleStats& stats,
                  const TargetDensity& target, const DriftOptions& options);
Matrix aldi_drift(const ParticleEnsemble& ens, const EnsembleStats& stats,
                  const TargetDensity& target, bool correction);

/// Column i: -D(U) R^{-1} (G(u_i) - y) - C(U) P0^{-1} (u_i - mu0)
///           + [correction] (D+1)/N (u_i - m(U)).
/// Evaluates the forward map exactly once per particle.
Matrix gradient_free_drift(const ParticleEnsemble& ens, const EnsembleStats& stats,
                           const GaussianInverseProblem& problem, const DriftOptions& options);
Matrix gradient_free_drift(const ParticleEnsemble& ens, const EnsembleStats& stats,
                           const GaussianInverseProblem& problem, bool correction);

/// sqrt(2 dt) * sqrt_factor * draws, with draws N x N.
Matrix noise_increment(const EnsembleStats& stats, double dt, const Matrix& draws);

enum class KalmanVariant { enkbf, eki };

/// Gradient-free Kalman-Bucy drift. enkbf column i:
///   -D(U) R^{-1} (1/2 (G(u_i) + m(G(U))) - y);
/// eki uses G(u_i) in place of the averaged image.
Matrix enkbf_drift(const ParticleEnsemble& ens, const EnsembleStats& stats,
                   const GaussianInverseProblem& problem, KalmanVariant variant);

/// Kalman-Bucy drift with exact forward adjoint:
///   -C(U) (dG/du_i)^T R^{-1} (1/2 (G(u_i) + m(G(U))) - y).
Matrix enkbf_gradient_drift(const ParticleEnsemble& ens, const EnsembleStats& stats,
                            const GaussianInverseProblem& problem, double jitter = 0.0);

/// Non-interacting Langevin step with fixed preconditioner C:
///   u_i - dt C grad Phi(u_i) + sqrt(2 dt) C_sqrt xi_i, xi = draws.col(i).
ParticleEnsemble langevin_const_step(const ParticleEnsemble& ens, const Matrix& precond,
                                     const Matrix& precond_sqrt, const TargetDensity& target,
                                     double dt, const Matrix& draws);

/// One explicit Euler-Maruyama step U_{k+1} = U_k + dt drift(U_k) + noise(U_k).
/// Noise depends only on (config.seed, step_index).
ParticleEnsemble step(const ParticleEnsemble& ens, const SamplerConfig& config,
                      const SamplingProblem& problem, std::uint64_t step_index);

struct Snapshot {
  std::size_t step;
  double time;
  ParticleEnsemble ensemble;
};

struct RunRecord {
  std::vector<Snapshot> snapshots;
  /// (time, smallest covariance eigenvalue) at every recorded snapshot.
  std::vector<std::pair<double, double>> min_eig_series;
  std::uint64_t seed = 0;
  SamplerConfig config_echo;
  std::size_t snapshot_stride = 1;
  std::vector<std::string> warnings;
};

struct RecordOptions {
  std::size_t stride = 1;
  /// Snapshots strictly before this step are skipped (the initial ensemble is
  /// always kept).
  std::size_t first_step = 0;
};

/// Integrates config.num_steps steps, recording the initial ensemble, every
/// stride-th step and the final ensemble.
RunRecord run(const ParticleEnsemble& initial, const SamplerConfig& config,
              const SamplingProblem& problem, const RecordOptions& options);
RunRecord run(const ParticleEnsemble& initial, const SamplerConfig& config,
              const SamplingProblem& problem, std::size_t snapshot_stride = 1);

}  // namespace aldi
