#include "aldi/samplers.hpp"

#include <array>
#include <cmath>

#include "aldi/errors.hpp"
#include "aldi/rng.hpp"

namespace aldi {

namespace {

struct FamilyName {
  SamplerFamily family;
  std::string_view name;
};

constexpr std::array<FamilyName, 8> kFamilyNames{{
    {SamplerFamily::aldi, "aldi"},
    {SamplerFamily::eks, "eks"},
    {SamplerFamily::aldi_gradient_free, "aldi_gradient_free"},
    {SamplerFamily::eks_gradient_free, "eks_gradient_free"},
    {SamplerFamily::langevin_const, "langevin_const"},
    {SamplerFamily::enkbf, "enkbf"},
    {SamplerFamily::enkbf_gradient_free, "enkbf_gradient_free"},
    {SamplerFamily::eki, "eki"},
}};

// Seed offset for the isotropic jitter noise stream.
constexpr std::uint64_t kJitterStream = 0x6a177e2ULL;

double correction_coefficient(const DriftOptions& options, Index dim, Index size) {
  if (!options.correction) return 0.0;
  return options.correction_scale * static_cast<double>(dim + 1) / static_cast<double>(size);
}

// Preconditioner C(U) + jitter I applied to the columns of `rhs`.
Matrix precondition(const EnsembleStats& stats, const Matrix& rhs, double jitter) {
  Matrix out = stats.covariance * rhs;
  if (jitter > 0.0) out += jitter * rhs;
  return out;
}

Matrix evaluate_images(const ParticleEnsemble& ens, const GaussianInverseProblem& problem) {
  Matrix images(problem.obs_dim(), ens.size());
  for (Index i = 0; i < ens.size(); ++i) {
    try {
      images.col(i) = problem.forward(ens.particle(i));
    } catch (const NumericError& e) {
      throw e.at_particle(i);
    }
  }
  return images;
}

bool uses_correction(SamplerFamily family) {
  return family == SamplerFamily::aldi || family == SamplerFamily::aldi_gradient_free;
}

class Stepper {
 public:
  Stepper(const SamplerConfig& config, const SamplingProblem& problem)
      : config_(config), problem_(problem) {
    config_.validate(problem.dim());
    if (config_.family == SamplerFamily::langevin_const) {
      precond_sqrt_ = symmetric_sqrt(*config_.const_preconditioner);
    }
  }

  ParticleEnsemble advance(const ParticleEnsemble& ens, std::uint64_t k) const {
    try {
      return advance_unchecked(ens, k);
    } catch (const NumericError& e) {
      throw e.at_step(k);
    }
  }

 private:
  ParticleEnsemble advance_unchecked(const ParticleEnsemble& ens, std::uint64_t k) const {
    const double dt = config_.step_size;
    const Index n = ens.size();
    const Index d = ens.dim();

    if (config_.family == SamplerFamily::langevin_const) {
      return langevin_const_step(ens, *config_.const_preconditioner, precond_sqrt_,
                                 problem_.target(), dt, step_noise(config_.seed, k, d, n));
    }

    const EnsembleStats stats = empirical_stats(ens);
    DriftOptions options;
    options.correction = uses_correction(config_.family);
    options.correction_scale = config_.correction_scale;
    options.jitter = config_.jitter;

    Matrix drift;
    switch (config_.family) {
      case SamplerFamily::aldi:
      case SamplerFamily::eks:
        drift = aldi_drift(ens, stats, problem_.target(), options);
        break;
      case SamplerFamily::aldi_gradient_free:
      case SamplerFamily::eks_gradient_free:
        drift = gradient_free_drift(ens, stats, problem_.inverse_problem(), options);
        break;
      case SamplerFamily::enkbf:
        drift = enkbf_gradient_drift(ens, stats, problem_.inverse_problem(), config_.jitter);
        break;
      case SamplerFamily::enkbf_gradient_free:
        drift = enkbf_drift(ens, stats, problem_.inverse_problem(), KalmanVariant::enkbf);
        break;
      case SamplerFamily::eki:
        drift = enkbf_drift(ens, stats, problem_.inverse_problem(), KalmanVariant::eki);
        break;
      case SamplerFamily::langevin_const:
        break;
    }

    Matrix next = ens.states() + dt * drift;
    if (!is_deterministic(config_.family)) {
      if (config_.noise_root == NoiseRoot::generalized) {
        next += noise_increment(stats, dt, step_noise(config_.seed, k, n, n));
      } else {
        next += std::sqrt(2.0 * dt) * symmetric_sqrt(stats.covariance) *
                step_noise(config_.seed, k, d, n);
      }
      if (config_.jitter > 0.0) {
        next += std::sqrt(2.0 * dt * config_.jitter) *
                step_noise(derive_seed(config_.seed, {kJitterStream}), k, d, n);
      }
    }
    if (!next.allFinite()) {
      Index bad = 0;
      for (; bad < n; ++bad) {
        if (!next.col(bad).allFinite()) break;
      }
      throw NumericError("non-finite particle state after update", bad);
    }
    return ParticleEnsemble(std::move(next));
  }

  SamplerConfig config_;
  const SamplingProblem& problem_;
  Matrix precond_sqrt_;
};

}  // namespace

std::string_view to_string(SamplerFamily family) {
  for (const auto& entry : kFamilyNames) {
    if (entry.family == family) return entry.name;
  }
  return "unknown";
}

std::optional<SamplerFamily> parse_family(std::string_view name) {
  for (const auto& entry : kFamilyNames) {
    if (entry.name == name) return entry.family;
  }
  return std::nullopt;
}

bool is_gradient_free(SamplerFamily family) {
  return family == SamplerFamily::aldi_gradient_free ||
         family == SamplerFamily::eks_gradient_free ||
         family == SamplerFamily::enkbf_gradient_free || family == SamplerFamily::eki;
}

bool is_deterministic(SamplerFamily family) {
  return family == SamplerFamily::enkbf || family == SamplerFamily::enkbf_gradient_free ||
         family == SamplerFamily::eki;
}

bool is_interacting(SamplerFamily family) { return family != SamplerFamily::langevin_const; }

void SamplerConfig::validate(Index dim) const {
  if (!(step_size >= 0.0) || !std::isfinite(step_size)) {
    throw InvalidInput("step_size must be a finite non-negative number");
  }
  if (!(jitter >= 0.0) || !std::isfinite(jitter)) {
    throw InvalidInput("jitter must be a finite non-negative number");
  }
  if (family == SamplerFamily::langevin_const) {
    if (!const_preconditioner) {
      throw ConfigError("langevin_const requires const_preconditioner");
    }
    if (const_preconditioner->rows() != dim) {
      throw ConfigError("const_preconditioner must be D x D");
    }
    try {
      require_spd(*const_preconditioner, "const_preconditioner");
    } catch (const InvalidInput& e) {
      throw ConfigError(e.what());
    }
  }
}

SamplingProblem::SamplingProblem(TargetDensity target) : target_(std::move(target)) {}

SamplingProblem::SamplingProblem(GaussianInverseProblem problem)
    : target_(bip_target(problem)), inverse_(std::move(problem)) {}

const GaussianInverseProblem& SamplingProblem::inverse_problem() const {
  if (!inverse_) {
    throw ConfigError("gradient-free and Kalman families require a Gaussian inverse problem");
  }
  return *inverse_;
}

Matrix aldi_drift(const ParticleEnsemble& ens, const EnsembleStats& stats,
                  const TargetDensity& target, const DriftOptions& options) {
  if (!target.has_gradient()) {
    throw ConfigError("aldi/eks require a target gradient");
  }
  Matrix grads(ens.dim(), ens.size());
  for (Index i = 0; i < ens.size(); ++i) {
    Vector g = target.gradient(ens.particle(i));
    if (!g.allFinite()) throw NumericError("target gradient is non-finite", i);
    grads.col(i) = g;
  }
  Matrix drift = -precondition(stats, grads, options.jitter);
  const double coef = correction_coefficient(options, ens.dim(), ens.size());
  if (coef != 0.0) drift += coef * stats.deviations;
  return drift;
}

Matrix aldi_drift(const ParticleEnsemble& ens, const EnsembleStats& stats,
                  const TargetDensity& target, bool correction) {
  return aldi_drift(ens, stats, target, DriftOptions{correction, 1.0, 0.0});
}

Matrix gradient_free_drift(const ParticleEnsemble& ens, const EnsembleStats& stats,
                           const GaussianInverseProblem& problem, const DriftOptions& options) {
  const Matrix images = evaluate_images(ens, problem);
  const Matrix cross = cross_covariance(ens, images);
  const Matrix residual = problem.noise_precision_apply(images.colwise() - problem.obs());
  const Matrix prior_force =
      problem.prior_precision() * (ens.states().colwise() - problem.prior_mean());

  Matrix drift = -(cross * residual) - precondition(stats, prior_force, options.jitter);
  const double coef = correction_coefficient(options, ens.dim(), ens.size());
  if (coef != 0.0) drift += coef * stats.deviations;
  return drift;
}

Matrix gradient_free_drift(const ParticleEnsemble& ens, const EnsembleStats& stats,
                           const GaussianInverseProblem& problem, bool correction) {
  return gradient_free_drift(ens, stats, problem, DriftOptions{correction, 1.0, 0.0});
}

Matrix noise_increment(const EnsembleStats& stats, double dt, const Matrix& draws) {
  if (draws.rows() != stats.sqrt_factor.cols()) {
    throw InvalidInput("noise_increment: draws must have N rows");
  }
  return std::sqrt(2.0 * dt) * (stats.sqrt_factor * draws);
}

Matrix enkbf_drift(const ParticleEnsemble& ens, const EnsembleStats& /*stats*/,
                   const GaussianInverseProblem& problem, KalmanVariant variant) {
  const Matrix images = evaluate_images(ens, problem);
  const Matrix cross = cross_covariance(ens, images);
  Matrix innovation;
  if (variant == KalmanVariant::enkbf) {
    const Vector image_mean = images.rowwise().mean();
    innovation = (0.5 * (images.colwise() + image_mean)).colwise() - problem.obs();
  } else {
    innovation = images.colwise() - problem.obs();
  }
  return -(cross * problem.noise_precision_apply(innovation));
}

Matrix enkbf_gradient_drift(const ParticleEnsemble& ens, const EnsembleStats& stats,
                            const GaussianInverseProblem& problem, double jitter) {
  const Matrix images = evaluate_images(ens, problem);
  const Vector image_mean = images.rowwise().mean();
  const Matrix innovation = (0.5 * (images.colwise() + image_mean)).colwise() - problem.obs();
  const Matrix weights = problem.noise_precision_apply(innovation);
  Matrix pulled(ens.dim(), ens.size());
  for (Index i = 0; i < ens.size(); ++i) {
    try {
      pulled.col(i) = problem.adjoint_action(ens.particle(i), weights.col(i));
    } catch (const NumericError& e) {
      throw e.at_particle(i);
    }
  }
  return -precondition(stats, pulled, jitter);
}

ParticleEnsemble langevin_const_step(const ParticleEnsemble& ens, const Matrix& precond,
                                     const Matrix& precond_sqrt, const TargetDensity& target,
                                     double dt, const Matrix& draws) {
  if (precond.rows() != ens.dim() || precond_sqrt.rows() != ens.dim()) {
    throw InvalidInput("langevin_const_step: preconditioner must be D x D");
  }
  if (draws.rows() != ens.dim() || draws.cols() != ens.size()) {
    throw InvalidInput("langevin_const_step: draws must be D x N");
  }
  Matrix next = ens.states();
  const double scale = std::sqrt(2.0 * dt);
  for (Index i = 0; i < ens.size(); ++i) {
    Vector g = target.gradient(ens.particle(i));
    if (!g.allFinite()) throw NumericError("target gradient is non-finite", i);
    next.col(i) += -dt * (precond * g) + scale * (precond_sqrt * draws.col(i));
  }
  if (!next.allFinite()) throw NumericError("non-finite particle state after update");
  return ParticleEnsemble(std::move(next));
}

ParticleEnsemble step(const ParticleEnsemble& ens, const SamplerConfig& config,
                      const SamplingProblem& problem, std::uint64_t step_index) {
  if (ens.dim() != problem.dim()) {
    throw InvalidInput("step: ensemble dimension does not match problem");
  }
  return Stepper(config, problem).advance(ens, step_index);
}

RunRecord run(const ParticleEnsemble& initial, const SamplerConfig& config,
              const SamplingProblem& problem, const RecordOptions& options) {
  if (initial.dim() != problem.dim()) {
    throw InvalidInput("run: ensemble dimension does not match problem");
  }
  if (options.stride < 1) throw InvalidInput("run: snapshot stride must be positive");
  const Stepper stepper(config, problem);

  RunRecord record;
  record.seed = config.seed;
  record.config_echo = config;
  record.snapshot_stride = options.stride;

  const Index d = initial.dim();
  const Index n = initial.size();
  if (config.family != SamplerFamily::langevin_const && !is_deterministic(config.family) &&
      n <= d + 1) {
    record.warnings.push_back("ensemble size N=" + std::to_string(n) +
                              " <= D+1=" + std::to_string(d + 1) +
                              ": the dynamics is not ergodic on the full state space");
  }
  if (is_interacting(config.family) && n > 1 &&
      empirical_stats(initial).covariance.trace() == 0.0) {
    record.warnings.push_back(
        "initial ensemble is coincident (zero covariance): the particles will not move");
  }

  auto record_snapshot = [&](std::size_t k, const ParticleEnsemble& ens) {
    const double t = static_cast<double>(k) * config.step_size;
    record.min_eig_series.emplace_back(t, min_eigenvalue_sym(empirical_stats(ens).covariance));
    record.snapshots.push_back(Snapshot{k, t, ens});
  };

  ParticleEnsemble current = initial;
  record_snapshot(0, current);
  for (std::size_t k = 0; k < config.num_steps; ++k) {
    current = stepper.advance(current, k);
    const std::size_t done = k + 1;
    const bool on_stride = done >= options.first_step && done % options.stride == 0;
    if (on_stride || done == config.num_steps) record_snapshot(done, current);
  }
  return record;
}

RunRecord run(const ParticleEnsemble& initial, const SamplerConfig& config,
              const SamplingProblem& problem, std::size_t snapshot_stride) {
  return run(initial, config, problem, RecordOptions{snapshot_stride, 0});
}

}  // namespace aldi
