#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aldi/samplers.hpp"

namespace aldi {

/// Deliberate defects injected into the sampler runs of the property suite.
/// Used to confirm that each check catches the defect it is meant to catch.
struct CheckFixture {
  bool flip_correction_sign = false;
  /// Symmetric covariance root with D-dimensional noise.
  bool symmetric_root = false;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  /// Human-readable acceptance band, e.g. "<= 1e-08" or "[0.9, 1.1]".
  std::string band;
};

/// Max over steps of |U_k - (M V_k + b 1^T)| / |U_k| for shared-noise runs in
/// original and affinely transformed coordinates. D=3, N=6, Gaussian target
/// (or affine forward map for gradient-free families), dt = 0.01.
double affine_invariance_discrepancy(SamplerFamily family, std::size_t steps,
                                     std::uint64_t seed, const CheckFixture& fixture = {});

/// Max relative error between C(U) times the central-difference gradient of
/// log det C(U) and (2/N)(u_i - m(U)), over all particles of `trials`
/// random ensembles.
double logdet_identity_error(Index dim, Index size, int trials, std::uint64_t seed);

/// Max over recorded steps of subspace_residual / max state norm for ALDI
/// with N <= D on a quadratic target.
double subspace_confinement_ratio(Index dim, Index size, std::size_t steps, std::uint64_t seed);

/// Max relative error of the Darcy adjoint gradient against central
/// differences of the misfit over `fields` random fields.
double adjoint_gradient_error(Index grid_size, int fields, std::uint64_t seed);

/// Ratio of the max pressure error at D and 2D for a = 1, f = sin.
double pde_convergence_ratio(Index grid_size);

/// Pooled variance of a 1-D standard Gaussian sampled with the given family.
double gaussian_pooled_variance(SamplerFamily family, Index size, double dt, std::size_t steps,
                                std::uint64_t seed, const CheckFixture& fixture = {});

/// Smallest covariance eigenvalue seen over a run, per seed.
double min_covariance_eigenvalue(Index dim, Index size, std::size_t steps, std::uint64_t seed,
                                 const CheckFixture& fixture = {});

/// The full release-gate suite with fixed seeds.
std::vector<CheckResult> run_property_checks(const CheckFixture& fixture = {});

}  // namespace aldi
