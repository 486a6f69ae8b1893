#pragma once

// Newton solver for the position constraint of RATTLE: find theta such that
// xi(q_free + M^{-1} grad_xi(q) theta) = 0, starting from theta = 0.
// Success or failure of this solve decides whether a configuration can be
// integrated at all.

#include "mghmc/model.hpp"

#include <string_view>

namespace mghmc {

enum class NewtonCriterion {
  /// max(|theta_{n+1} - theta_n|, |xi(q_{n+1})|) < tolerance.
  IncrementAndResidual,
  /// |M^{-1} grad_xi(q) (theta_{n+1} - theta_n)| < tolerance, i.e. the
  /// increment measured as a displacement of the position. The residual
  /// |xi| < tolerance is still required.
  PositionIncrement,
};

struct NewtonConfig {
  int max_iterations = 100;
  double tolerance = 1e-12;
  double condition_limit = kDefaultConditionLimit;
  /// Converged multipliers above this norm are reported as MaxIterations.
  double multiplier_limit = 1e6;
  NewtonCriterion criterion = NewtonCriterion::IncrementAndResidual;

  /// Throws InvalidParams.
  void validate() const;
};

enum class ProjectionStatus { Converged, MaxIterations, SingularJacobian };

std::string_view to_string(ProjectionStatus s);

struct ProjectionOutcome {
  ProjectionStatus status = ProjectionStatus::MaxIterations;
  /// Meaningful only when converged.
  Vector multiplier;
  int iterations = 0;
  /// |xi| at the last iterate.
  double residual = 0.0;

  bool converged() const { return status == ProjectionStatus::Converged; }
};

/// `q` must lie on the manifold; `jacobian_q` is grad_xi(q), passed in so
/// callers that already hold it do not re-evaluate it. Deterministic.
ProjectionOutcome newton_project(const ConstraintModel& model, const Matrix& jacobian_q,
                                 const Vector& q_free, const NewtonConfig& cfg);
ProjectionOutcome newton_project(const ConstraintModel& model, const Vector& q,
                                 const Vector& q_free, const NewtonConfig& cfg);

}  // namespace mghmc
