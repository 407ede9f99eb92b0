#include "aldi/darcy.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "aldi/errors.hpp"
#include "aldi/rng.hpp"

namespace aldi::darcy {

double DarcyModel::mesh() const { return 2.0 * std::numbers::pi / static_cast<double>(grid_size); }

double DarcyModel::node(Index i) const { return static_cast<double>(i) * mesh(); }

Index DarcyModel::obs_node(Index j) const { return ((grid_size / obs_count) * (j + 1)) % grid_size; }

void DarcyModel::validate() const {
  if (grid_size < 2) throw InvalidInput("DarcyModel: grid_size must be at least 2");
  if (obs_count < 1 || grid_size % obs_count != 0) {
    throw InvalidInput("DarcyModel: grid_size must be divisible by obs_count");
  }
  if (!(noise_var > 0.0)) throw InvalidInput("DarcyModel: noise_var must be positive");
  if (!(prior_mu > 0.0)) throw InvalidInput("DarcyModel: prior_mu must be positive");
  if (forcing.size() != grid_size) throw InvalidInput("DarcyModel: forcing must have D entries");
  const double scale = std::max(1.0, forcing.cwiseAbs().maxCoeff());
  if (std::abs(forcing.sum()) > 1e-12 * static_cast<double>(grid_size) * scale) {
    throw InvalidInput("DarcyModel: forcing must have zero mean");
  }
}

DarcyModel standard_model(Index grid_size, Index obs_count, double noise_var, double prior_mu) {
  DarcyModel model;
  model.grid_size = grid_size;
  model.obs_count = obs_count;
  model.noise_var = noise_var;
  model.prior_mu = prior_mu;
  const double length = 2.0 * std::numbers::pi;
  model.forcing.resize(grid_size);
  for (Index i = 0; i < grid_size; ++i) {
    const double s = 2.0 * model.node(i) - length;
    model.forcing(i) = std::exp(-s * s / 40.0);
  }
  model.forcing.array() -= model.forcing.mean();
  model.validate();
  return model;
}

Vector solve_periodic(const Vector& edge_coeff, double mesh, const Vector& rhs) {
  const Index d = rhs.size();
  if (edge_coeff.size() != d) throw InvalidInput("solve_periodic: coefficient/rhs size mismatch");
  Vector p = Vector::Zero(d);
  if (d < 2) return p;
  if ((edge_coeff.array() <= 0.0).any() || !edge_coeff.allFinite()) {
    throw NumericError("solve_periodic: coefficients must be positive and finite");
  }
  const double lambda = rhs.mean();
  const double h2 = mesh * mesh;

  // Unknowns p_1..p_{D-1} with p_0 = 0; the node-0 row is implied by the others.
  const Index m = d - 1;
  std::vector<double> upper(static_cast<std::size_t>(m));
  std::vector<double> y(static_cast<std::size_t>(m));
  double prev_upper = 0.0;
  double prev_y = 0.0;
  for (Index r = 0; r < m; ++r) {
    const Index i = r + 1;
    const double lower = (r > 0) ? edge_coeff(i - 1) : 0.0;
    const double diag = -(edge_coeff(i - 1) + edge_coeff(i));
    const double up = (r < m - 1) ? edge_coeff(i) : 0.0;
    const double b = h2 * (rhs(i) - lambda);
    const double denom = diag - lower * prev_upper;
    prev_upper = up / denom;
    prev_y = (b - lower * prev_y) / denom;
    upper[static_cast<std::size_t>(r)] = prev_upper;
    y[static_cast<std::size_t>(r)] = prev_y;
  }
  p(m) = y[static_cast<std::size_t>(m - 1)];
  for (Index r = m - 2; r >= 0; --r) {
    p(r + 1) = y[static_cast<std::size_t>(r)] - upper[static_cast<std::size_t>(r)] * p(r + 2);
  }
  p.array() -= p.mean();
  return p;
}

Matrix diffusion_matrix(const Vector& edge_coeff, double mesh) {
  const Index d = edge_coeff.size();
  const double h2 = mesh * mesh;
  Matrix lap = Matrix::Zero(d, d);
  for (Index k = 0; k < d; ++k) {
    const Index j = (k + 1) % d;
    const double a = edge_coeff(k) / h2;
    lap(k, k) -= a;
    lap(j, j) -= a;
    lap(k, j) += a;
    lap(j, k) += a;
  }
  return lap;
}

Vector solve_periodic_dense(const Vector& edge_coeff, double mesh, const Vector& rhs) {
  const Index d = rhs.size();
  if (edge_coeff.size() != d) {
    throw InvalidInput("solve_periodic_dense: coefficient/rhs size mismatch");
  }
  Matrix bordered = Matrix::Zero(d + 1, d + 1);
  bordered.topLeftCorner(d, d) = diffusion_matrix(edge_coeff, mesh);
  bordered.block(0, d, d, 1).setOnes();
  bordered.block(d, 0, 1, d).setOnes();
  Vector full_rhs = Vector::Zero(d + 1);
  full_rhs.head(d) = rhs;
  Eigen::FullPivLU<Matrix> lu(bordered);
  if (!lu.isInvertible()) throw NumericError("solve_periodic_dense: singular bordered system");
  return lu.solve(full_rhs).head(d);
}

namespace {

void check_field(const DarcyModel& model, const DarcyField& field) {
  if (field.log_perm.size() != model.grid_size) {
    throw InvalidInput("DarcyField: log_perm must have " + std::to_string(model.grid_size) +
                       " entries");
  }
  if (!field.log_perm.allFinite()) throw NumericError("DarcyField: non-finite log-permeability");
}

Vector observe(const DarcyModel& model, const Vector& pressure) {
  Vector out(model.obs_count);
  for (Index j = 0; j < model.obs_count; ++j) out(j) = pressure(model.obs_node(j));
  return out;
}

}  // namespace

Vector solve_pressure(const DarcyModel& model, const DarcyField& field) {
  check_field(model, field);
  const Vector coeff = field.log_perm.array().exp();
  return solve_periodic(coeff, model.mesh(), -model.forcing);
}

Vector forward_map(const DarcyModel& model, const DarcyField& field) {
  return observe(model, solve_pressure(model, field));
}

Vector forward_adjoint_action(const DarcyModel& model, const DarcyField& field,
                              const Vector& weights) {
  check_field(model, field);
  if (weights.size() != model.obs_count) {
    throw InvalidInput("forward_adjoint_action: weights must have K entries");
  }
  const Index d = model.grid_size;
  const double h2 = model.mesh() * model.mesh();
  const Vector coeff = field.log_perm.array().exp();
  const Vector pressure = solve_periodic(coeff, model.mesh(), -model.forcing);

  Vector selected = Vector::Zero(d);
  for (Index j = 0; j < model.obs_count; ++j) selected(model.obs_node(j)) += weights(j);
  const Vector adjoint = solve_periodic(coeff, model.mesh(), selected);

  Vector grad(d);
  for (Index k = 0; k < d; ++k) {
    const Index j = (k + 1) % d;
    grad(k) = coeff(k) / h2 * (pressure(j) - pressure(k)) * (adjoint(j) - adjoint(k));
  }
  return grad;
}

Vector misfit_gradient_adjoint(const DarcyModel& model, const DarcyField& field,
                               const Vector& y_obs) {
  if (y_obs.size() != model.obs_count) {
    throw InvalidInput("misfit_gradient_adjoint: y_obs must have K entries");
  }
  const Vector residual = (forward_map(model, field) - y_obs) / model.noise_var;
  return forward_adjoint_action(model, field, residual);
}

Matrix build_prior_precision(const DarcyModel& model) {
  if (!(model.prior_mu > 0.0)) throw InvalidInput("build_prior_precision: prior_mu must be positive");
  const Index d = model.grid_size;
  const double h = model.mesh();
  const Matrix lap = diffusion_matrix(Vector::Ones(d), h);
  const Matrix b =
      Matrix::Constant(d, d, model.prior_mu / static_cast<double>(d)) - lap;
  Matrix precision = 4.0 * h * (b * b);
  return 0.5 * (precision + precision.transpose());
}

ParticleEnsemble sample_prior(const DarcyModel& model, const Matrix& precision, Index count,
                              std::uint64_t seed) {
  if (precision.rows() != model.grid_size) {
    throw InvalidInput("sample_prior: precision must be D x D");
  }
  if (count < 1) throw InvalidInput("sample_prior: count must be positive");
  require_spd(precision, "prior precision");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(precision);
  const Matrix factor =
      eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal();
  RandomStream stream(seed);
  return ParticleEnsemble(factor * stream.standard_normal(model.grid_size, count));
}

TruthAndData make_truth_and_data(const DarcyModel& model, std::uint64_t seed, bool add_noise) {
  model.validate();
  TruthAndData out;
  const double h = model.mesh();
  out.truth.log_perm.resize(model.grid_size);
  for (Index k = 0; k < model.grid_size; ++k) {
    out.truth.log_perm(k) = 0.5 * std::sin(model.node(k + 1) - 0.5 * h);
  }
  out.y_obs = forward_map(model, out.truth);
  if (add_noise) {
    RandomStream stream(seed);
    const double sd = std::sqrt(model.noise_var);
    for (Index j = 0; j < model.obs_count; ++j) out.y_obs(j) += sd * stream.normal();
  }
  return out;
}

GaussianInverseProblem make_inverse_problem(const DarcyModel& model, const Vector& y_obs,
                                            const Matrix& prior_precision) {
  model.validate();
  auto m = std::make_shared<const DarcyModel>(model);
  const Index d = model.grid_size;
  return GaussianInverseProblem(
      d, [m](const Vector& u) -> Vector { return forward_map(*m, DarcyField{u}); },
      model.noise_var * Matrix::Identity(model.obs_count, model.obs_count), y_obs,
      Vector::Zero(d), prior_precision,
      [m](const Vector& u, const Vector& w) -> Vector {
        return forward_adjoint_action(*m, DarcyField{u}, w);
      });
}

}  // namespace aldi::darcy
