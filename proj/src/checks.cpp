#include "aldi/checks.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "aldi/darcy.hpp"
#include "aldi/diagnostics.hpp"
#include "aldi/errors.hpp"
#include "aldi/rng.hpp"
#include "aldi/targets.hpp"

namespace aldi {

namespace {

SamplerConfig fixture_config(SamplerFamily family, double dt, std::size_t steps,
                             std::uint64_t seed, const CheckFixture& fixture) {
  SamplerConfig config;
  config.family = family;
  config.step_size = dt;
  config.num_steps = steps;
  config.seed = seed;
  if (fixture.flip_correction_sign) config.correction_scale = -1.0;
  if (fixture.symmetric_root) config.noise_root = NoiseRoot::symmetric;
  return config;
}

Matrix random_spd(RandomStream& rng, Index dim, double shift) {
  const Matrix a = rng.standard_normal(dim, dim);
  Matrix spd = a * a.transpose() / static_cast<double>(dim) + shift * Matrix::Identity(dim, dim);
  return 0.5 * (spd + spd.transpose());
}

Matrix random_orthogonal(RandomStream& rng, Index dim) {
  Eigen::HouseholderQR<Matrix> qr(rng.standard_normal(dim, dim));
  return qr.householderQ() * Matrix::Identity(dim, dim);
}

// Invertible map with singular values spread over [1, 5].
AffineMap random_affine(RandomStream& rng, Index dim) {
  Vector singular(dim);
  for (Index i = 0; i < dim; ++i) {
    singular(i) = dim > 1 ? 1.0 + 4.0 * static_cast<double>(i) / static_cast<double>(dim - 1) : 2.0;
  }
  Matrix m = random_orthogonal(rng, dim) * singular.asDiagonal() * random_orthogonal(rng, dim);
  return AffineMap(std::move(m), rng.standard_normal(dim, 1));
}

double log_det(const Matrix& mat) {
  Eigen::LLT<Matrix> llt(mat);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

std::string format_band(const char* op, double value) {
  std::ostringstream os;
  os << op << ' ' << value;
  return os.str();
}

std::string format_interval(double lo, double hi) {
  std::ostringstream os;
  os << '[' << lo << ", " << hi << ']';
  return os.str();
}

}  // namespace

double affine_invariance_discrepancy(SamplerFamily family, std::size_t steps,
                                     std::uint64_t seed, const CheckFixture& fixture) {
  constexpr Index kDim = 3;
  constexpr Index kSize = 6;
  RandomStream rng(seed);
  const AffineMap map = random_affine(rng, kDim);
  const AffineMap inverse = map.inverse();

  std::optional<SamplingProblem> original;
  std::optional<SamplingProblem> transformed;
  if (is_gradient_free(family) || family == SamplerFamily::enkbf) {
    constexpr Index kObs = 4;
    const Matrix g = rng.standard_normal(kObs, kDim);
    const Vector c = rng.standard_normal(kObs, 1);
    const Vector y = rng.standard_normal(kObs, 1);
    const Vector mu0 = rng.standard_normal(kDim, 1);
    GaussianInverseProblem problem = linear_gaussian_problem(
        g, c, 0.5 * Matrix::Identity(kObs, kObs), y, mu0, random_spd(rng, kDim, 0.5));
    transformed.emplace(pullback(problem, map));
    original.emplace(std::move(problem));
  } else {
    const Vector mean = rng.standard_normal(kDim, 1);
    TargetDensity target = gaussian_target(mean, random_spd(rng, kDim, 0.5));
    transformed.emplace(pullback(target, map));
    original.emplace(std::move(target));
  }

  const ParticleEnsemble u0(rng.standard_normal(kDim, kSize));
  const ParticleEnsemble v0 = apply_affine(u0, inverse);
  const SamplerConfig config = fixture_config(family, 0.01, steps, seed, fixture);

  const RunRecord ru = run(u0, config, *original, 1);
  const RunRecord rv = run(v0, config, *transformed, 1);
  double worst = 0.0;
  for (std::size_t k = 0; k < ru.snapshots.size(); ++k) {
    const Matrix& u = ru.snapshots[k].ensemble.states();
    const Matrix mapped = apply_affine(rv.snapshots[k].ensemble, map).states();
    worst = std::max(worst, (u - mapped).norm() / u.norm());
  }
  return worst;
}

double logdet_identity_error(Index dim, Index size, int trials, std::uint64_t seed) {
  if (size <= dim) throw InvalidInput("logdet_identity_error: need N > D");
  RandomStream rng(seed);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Matrix states = rng.standard_normal(dim, size);
    const EnsembleStats stats = empirical_stats(ParticleEnsemble(states));
    for (Index i = 0; i < size; ++i) {
      Vector grad(dim);
      for (Index g = 0; g < dim; ++g) {
        const double eps = 1e-6 * (1.0 + std::abs(states(g, i)));
        Matrix plus = states;
        Matrix minus = states;
        plus(g, i) += eps;
        minus(g, i) -= eps;
        grad(g) = (log_det(empirical_stats(ParticleEnsemble(plus)).covariance) -
                   log_det(empirical_stats(ParticleEnsemble(minus)).covariance)) /
                  (2.0 * eps);
      }
      const Vector lhs = stats.covariance * grad;
      const Vector rhs = (2.0 / static_cast<double>(size)) * stats.deviations.col(i);
      worst = std::max(worst, (lhs - rhs).norm() / rhs.norm());
    }
  }
  return worst;
}

double subspace_confinement_ratio(Index dim, Index size, std::size_t steps, std::uint64_t seed) {
  RandomStream rng(seed);
  const Vector mean = rng.standard_normal(dim, 1);
  const SamplingProblem problem(gaussian_target(mean, random_spd(rng, dim, 0.5)));
  const ParticleEnsemble initial(rng.standard_normal(dim, size));
  const EnsembleStats stats = empirical_stats(initial);

  // Orthonormal basis of the span of the initial deviations.
  Eigen::JacobiSVD<Matrix> svd(stats.deviations, Eigen::ComputeThinU);
  const Vector sv = svd.singularValues();
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > 1e-12 * sv(0)) ++rank;
  const Matrix basis = svd.matrixU().leftCols(rank);

  SamplerConfig config;
  config.family = SamplerFamily::aldi;
  config.step_size = 0.01;
  config.num_steps = steps;
  config.seed = seed;
  const RunRecord record = run(initial, config, problem, 1);

  double worst = 0.0;
  for (const auto& snap : record.snapshots) {
    const double scale = std::max(1.0, snap.ensemble.states().colwise().norm().maxCoeff());
    worst = std::max(worst, subspace_residual(snap.ensemble, basis, stats.mean) / scale);
  }
  return worst;
}

double adjoint_gradient_error(Index grid_size, int fields, std::uint64_t seed) {
  const darcy::DarcyModel model = darcy::standard_model(grid_size);
  RandomStream rng(seed);
  double worst = 0.0;
  for (int f = 0; f < fields; ++f) {
    const Vector u = 0.3 * rng.standard_normal(grid_size, 1);
    const Vector u_data = 0.3 * rng.standard_normal(grid_size, 1);
    const Vector y = darcy::forward_map(model, darcy::DarcyField{u_data}) +
                     0.01 * rng.standard_normal(model.obs_count, 1);
    auto misfit_at = [&](const Vector& v) {
      const Vector r = darcy::forward_map(model, darcy::DarcyField{v}) - y;
      return 0.5 * r.squaredNorm() / model.noise_var;
    };
    const Vector grad = darcy::misfit_gradient_adjoint(model, darcy::DarcyField{u}, y);
    Vector fd(grid_size);
    for (Index k = 0; k < grid_size; ++k) {
      const double eps = 1e-5 * (1.0 + std::abs(u(k)));
      Vector plus = u;
      Vector minus = u;
      plus(k) += eps;
      minus(k) -= eps;
      fd(k) = (misfit_at(plus) - misfit_at(minus)) / (2.0 * eps);
    }
    worst = std::max(worst, (grad - fd).norm() / fd.norm());
  }
  return worst;
}

double pde_convergence_ratio(Index grid_size) {
  auto max_error = [](Index d) {
    darcy::DarcyModel model = darcy::standard_model(d, 1);
    for (Index i = 0; i < d; ++i) model.forcing(i) = std::sin(model.node(i));
    model.forcing.array() -= model.forcing.mean();
    const Vector p = darcy::solve_pressure(model, darcy::DarcyField{Vector::Zero(d)});
    double err = 0.0;
    for (Index i = 0; i < d; ++i) err = std::max(err, std::abs(p(i) - std::sin(model.node(i))));
    return err;
  };
  return max_error(grid_size) / max_error(2 * grid_size);
}

double gaussian_pooled_variance(SamplerFamily family, Index size, double dt, std::size_t steps,
                                std::uint64_t seed, const CheckFixture& fixture) {
  RandomStream rng(seed);
  const SamplingProblem problem(gaussian_target(Vector::Zero(1), Matrix::Identity(1, 1)));
  const ParticleEnsemble initial(rng.standard_normal(1, size));
  const SamplerConfig config = fixture_config(family, dt, steps, seed, fixture);
  const RunRecord record = run(initial, config, problem, 10);
  const double total = static_cast<double>(steps) * dt;
  return pooled_moments(record, 0.05 * total).covariance(0, 0);
}

double min_covariance_eigenvalue(Index dim, Index size, std::size_t steps, std::uint64_t seed,
                                 const CheckFixture& fixture) {
  RandomStream rng(seed);
  const Vector mean = rng.standard_normal(dim, 1);
  const SamplingProblem problem(gaussian_target(mean, random_spd(rng, dim, 0.5)));
  const ParticleEnsemble initial(rng.standard_normal(dim, size));
  const SamplerConfig config = fixture_config(SamplerFamily::aldi, 0.01, steps, seed, fixture);
  const RunRecord record = run(initial, config, problem, 1);
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& [t, eig] : record.min_eig_series) worst = std::min(worst, eig);
  return worst;
}

std::vector<CheckResult> run_property_checks(const CheckFixture& fixture) {
  std::vector<CheckResult> out;
  auto at_most = [&](std::string name, double measured, double tol) {
    out.push_back({std::move(name), measured <= tol, measured, format_band("<=", tol)});
  };

  for (SamplerFamily family :
       {SamplerFamily::aldi, SamplerFamily::eks, SamplerFamily::aldi_gradient_free}) {
    at_most("affine_invariance[" + std::string(to_string(family)) + "]",
            affine_invariance_discrepancy(family, 200, 11, fixture), 1e-8);
  }
  at_most("logdet_identity", logdet_identity_error(2, 5, 20, 12), 1e-5);
  at_most("subspace_confinement", subspace_confinement_ratio(5, 3, 1000, 13), 1e-8);
  at_most("adjoint_gradient", adjoint_gradient_error(50, 20, 14), 1e-5);

  const double ratio = pde_convergence_ratio(50);
  out.push_back({"pde_convergence", ratio >= 3.4 && ratio <= 4.6, ratio, format_interval(3.4, 4.6)});

  const double variance =
      gaussian_pooled_variance(SamplerFamily::aldi, 5, 0.01, 200000, 15, fixture);
  out.push_back({"gaussian_moments[aldi]", variance >= 0.9 && variance <= 1.1, variance,
                 format_interval(0.9, 1.1)});

  double smallest = std::numeric_limits<double>::infinity();
  for (std::uint64_t s = 0; s < 3; ++s) {
    smallest = std::min(smallest, min_covariance_eigenvalue(2, 4, 10000, 16 + s, fixture));
  }
  out.push_back({"nondegeneracy", smallest > 0.0, smallest, format_band(">", 0.0)});
  return out;
}

}  // namespace aldi
