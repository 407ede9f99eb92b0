#include "aldi/targets.hpp"

#include <cmath>
#include <string>

#include "aldi/errors.hpp"

namespace aldi {

void require_spd(const Matrix& mat, const char* what) {
  if (mat.rows() != mat.cols() || mat.rows() < 1) {
    throw InvalidInput(std::string(what) + ": matrix must be square and non-empty");
  }
  if (!mat.allFinite()) {
    throw InvalidInput(std::string(what) + ": matrix has non-finite entries");
  }
  const double scale = std::max(1.0, mat.cwiseAbs().maxCoeff());
  if ((mat - mat.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw InvalidInput(std::string(what) + ": matrix is not symmetric");
  }
  Eigen::LLT<Matrix> llt(mat);
  if (llt.info() != Eigen::Success || min_eigenvalue_sym(mat) <= 0.0) {
    throw InvalidInput(std::string(what) + ": matrix is not positive definite");
  }
}

TargetDensity::TargetDensity(Index dim, Potential potential, Gradient gradient)
    : dim_(dim), potential_(std::move(potential)), gradient_(std::move(gradient)) {
  if (dim_ < 1) throw InvalidInput("TargetDensity: dimension must be positive");
  if (!potential_) throw InvalidInput("TargetDensity: potential is required");
}

double TargetDensity::potential(const Vector& u) const {
  if (u.size() != dim_) throw InvalidInput("TargetDensity: point has wrong dimension");
  return potential_(u);
}

Vector TargetDensity::gradient(const Vector& u) const {
  if (!gradient_) throw ConfigError("target has no gradient; use a gradient-free family");
  if (u.size() != dim_) throw InvalidInput("TargetDensity: point has wrong dimension");
  return gradient_(u);
}

TargetDensity gaussian_target(Vector mean, Matrix precision) {
  if (precision.rows() != mean.size()) {
    throw InvalidInput("gaussian_target: precision size must match mean length");
  }
  require_spd(precision, "gaussian_target precision");
  auto m = std::make_shared<const Vector>(std::move(mean));
  auto p = std::make_shared<const Matrix>(std::move(precision));
  return TargetDensity(
      m->size(),
      [m, p](const Vector& u) {
        const Vector d = u - *m;
        return 0.5 * d.dot(*p * d);
      },
      [m, p](const Vector& u) -> Vector { return *p * (u - *m); });
}

TargetDensity pullback(const TargetDensity& target, const AffineMap& map) {
  if (map.dim() != target.dim()) {
    throw InvalidInput("pullback: map dimension does not match target");
  }
  auto t = std::make_shared<const TargetDensity>(target);
  auto f = std::make_shared<const AffineMap>(map);
  TargetDensity::Gradient grad;
  if (target.has_gradient()) {
    grad = [t, f](const Vector& v) -> Vector {
      return f->matrix().transpose() * t->gradient(f->apply(v));
    };
  }
  return TargetDensity(
      target.dim(), [t, f](const Vector& v) { return t->potential(f->apply(v)); },
      std::move(grad));
}

GaussianInverseProblem::GaussianInverseProblem(Index dim, ForwardMap forward,
                                               Matrix noise_cov, Vector obs,
                                               Vector prior_mean, Matrix prior_precision,
                                               AdjointAction forward_gradient_adjoint)
    : dim_(dim),
      forward_(std::move(forward)),
      adjoint_(std::move(forward_gradient_adjoint)),
      noise_cov_(std::move(noise_cov)),
      obs_(std::move(obs)),
      prior_mean_(std::move(prior_mean)),
      prior_precision_(std::move(prior_precision)) {
  if (dim_ < 1) throw InvalidInput("GaussianInverseProblem: dimension must be positive");
  if (!forward_) throw InvalidInput("GaussianInverseProblem: forward map is required");
  if (obs_.size() < 1 || noise_cov_.rows() != obs_.size()) {
    throw InvalidInput("GaussianInverseProblem: noise covariance must be K x K with K = obs length");
  }
  if (prior_mean_.size() != dim_ || prior_precision_.rows() != dim_) {
    throw InvalidInput("GaussianInverseProblem: prior mean/precision must match dimension");
  }
  require_spd(noise_cov_, "noise covariance");
  require_spd(prior_precision_, "prior precision");
  noise_llt_.compute(noise_cov_);
}

Vector GaussianInverseProblem::forward(const Vector& u) const {
  if (u.size() != dim_) throw InvalidInput("forward: point has wrong dimension");
  Vector g = forward_(u);
  if (g.size() != obs_dim()) {
    throw InvalidInput("forward: map returned " + std::to_string(g.size()) +
                       " values, expected " + std::to_string(obs_dim()));
  }
  if (!g.allFinite()) throw NumericError("forward map returned a non-finite value");
  return g;
}

Vector GaussianInverseProblem::adjoint_action(const Vector& u, const Vector& w) const {
  if (!adjoint_) {
    throw ConfigError("inverse problem has no forward adjoint; use a gradient-free family");
  }
  Vector out = adjoint_(u, w);
  if (!out.allFinite()) throw NumericError("forward adjoint returned a non-finite value");
  return out;
}

Matrix GaussianInverseProblem::noise_precision_apply(const Matrix& r) const {
  return noise_llt_.solve(r);
}

double GaussianInverseProblem::prior_penalty(const Vector& u) const {
  const Vector d = u - prior_mean_;
  return 0.5 * d.dot(prior_precision_ * d);
}

double misfit(const GaussianInverseProblem& problem, const Vector& u) {
  const Vector r = problem.obs() - problem.forward(u);
  const Vector weighted = problem.noise_precision_apply(r);
  return 0.5 * r.dot(weighted);
}

TargetDensity bip_target(const GaussianInverseProblem& problem) {
  auto p = std::make_shared<const GaussianInverseProblem>(problem);
  TargetDensity::Gradient grad;
  if (problem.has_adjoint()) {
    grad = [p](const Vector& u) -> Vector {
      const Vector w = p->noise_precision_apply(p->forward(u) - p->obs());
      return p->adjoint_action(u, w) + p->prior_precision() * (u - p->prior_mean());
    };
  }
  return TargetDensity(
      problem.dim(), [p](const Vector& u) { return misfit(*p, u) + p->prior_penalty(u); },
      std::move(grad));
}

GaussianInverseProblem pullback(const GaussianInverseProblem& problem, const AffineMap& map) {
  if (map.dim() != problem.dim()) {
    throw InvalidInput("pullback: map dimension does not match problem");
  }
  auto f = std::make_shared<const AffineMap>(map);
  auto fwd = problem.forward_map();
  GaussianInverseProblem::ForwardMap forward = [f, fwd](const Vector& v) -> Vector {
    return fwd(f->apply(v));
  };
  GaussianInverseProblem::AdjointAction adjoint;
  if (problem.has_adjoint()) {
    auto adj = problem.adjoint();
    adjoint = [f, adj](const Vector& v, const Vector& w) -> Vector {
      return f->matrix().transpose() * adj(f->apply(v), w);
    };
  }
  const AffineMap inv = map.inverse();
  Matrix precision = map.matrix().transpose() * problem.prior_precision() * map.matrix();
  precision = 0.5 * (precision + precision.transpose()).eval();
  return GaussianInverseProblem(problem.dim(), std::move(forward), problem.noise_cov(),
                                problem.obs(), inv.apply(problem.prior_mean()),
                                std::move(precision), std::move(adjoint));
}

GaussianInverseProblem linear_gaussian_problem(Matrix forward_matrix, Vector offset,
                                               Matrix noise_cov, Vector obs,
                                               Vector prior_mean, Matrix prior_precision) {
  if (offset.size() != forward_matrix.rows()) {
    throw InvalidInput("linear_gaussian_problem: offset length must match forward rows");
  }
  auto g = std::make_shared<const Matrix>(std::move(forward_matrix));
  auto c = std::make_shared<const Vector>(std::move(offset));
  const Index dim = g->cols();
  return GaussianInverseProblem(
      dim, [g, c](const Vector& u) -> Vector { return *g * u + *c; }, std::move(noise_cov),
      std::move(obs), std::move(prior_mean), std::move(prior_precision),
      [g](const Vector&, const Vector& w) -> Vector { return g->transpose() * w; });
}

}  // namespace aldi
