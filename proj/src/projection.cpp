#include "mghmc/projection.hpp"

#include <cmath>

namespace mghmc {

void NewtonConfig::validate() const {
  if (max_iterations < 1) throw InvalidParams("Newton max_iterations must be >= 1");
  if (!(tolerance > 0.0)) throw InvalidParams("Newton tolerance must be > 0");
  if (!(condition_limit > 1.0)) throw InvalidParams("Newton condition_limit must be > 1");
  if (!(multiplier_limit > 0.0)) throw InvalidParams("Newton multiplier_limit must be > 0");
}

std::string_view to_string(ProjectionStatus s) {
  switch (s) {
    case ProjectionStatus::Converged:
      return "converged";
    case ProjectionStatus::MaxIterations:
      return "max-iterations";
    case ProjectionStatus::SingularJacobian:
      return "singular-jacobian";
  }
  return "unknown";
}

ProjectionOutcome newton_project(const ConstraintModel& model, const Matrix& jacobian_q,
                                 const Vector& q_free, const NewtonConfig& cfg) {
  // Search direction M^{-1} grad_xi(q) is fixed for the whole solve.
  const Matrix direction = model.mass().apply_inverse(jacobian_q);

  ProjectionOutcome out;
  out.multiplier = Vector::Zero(jacobian_q.cols());
  Vector y = q_free;
  Vector xi = model.constraint(y);
  out.residual = xi.norm();

  for (int k = 1; k <= cfg.max_iterations; ++k) {
    out.iterations = k;
    const Matrix jacobian_y = model.constraint_jacobian(y);
    GramMatrix a;
    a.value = jacobian_y.transpose() * direction;
    a.condition_estimate = condition_estimate(a.value);
    if (!a.invertible(cfg.condition_limit) || !std::isfinite(out.residual)) {
      out.status = ProjectionStatus::SingularJacobian;
      return out;
    }
    const Vector delta = -solve_gram(a, xi, cfg.condition_limit);
    out.multiplier += delta;
    y = q_free + direction * out.multiplier;
    xi = model.constraint(y);
    out.residual = xi.norm();

    const double increment = cfg.criterion == NewtonCriterion::PositionIncrement
                                 ? (direction * delta).norm()
                                 : delta.norm();
    if (!std::isfinite(increment) || !std::isfinite(out.residual)) continue;
    if (std::max(increment, out.residual) < cfg.tolerance) {
      out.status = out.multiplier.norm() > cfg.multiplier_limit ? ProjectionStatus::MaxIterations
                                                                : ProjectionStatus::Converged;
      return out;
    }
  }
  out.status = ProjectionStatus::MaxIterations;
  return out;
}

ProjectionOutcome newton_project(const ConstraintModel& model, const Vector& q,
                                 const Vector& q_free, const NewtonConfig& cfg) {
  return newton_project(model, model.constraint_jacobian(q), q_free, cfg);
}

}  // namespace mghmc
