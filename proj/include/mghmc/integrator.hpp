#pragma once

// One RATTLE step composed with momentum reversal, and the reverse-checked
// version of it that is an involution for any timestep: the forward step is
// kept only when RATTLE started from the reversed proposal succeeds and comes
// back to the starting position.

#include "mghmc/projection.hpp"

#include <optional>
#include <string_view>

namespace mghmc {

enum class ReverseCheck {
  /// Reverse Newton must converge and land within reverse_tolerance of q.
  Full,
  /// Reverse Newton must converge; the returned position is not compared.
  PartialNoPositionCheck,
  /// No reverse step at all.
  NoneAtAll,
};

std::string_view to_string(ReverseCheck mode);

struct RattleConfig {
  double dt = 0.1;
  double reverse_tolerance = 1e-12;
  /// false: zero force in the proposal (random-walk proposal).
  bool use_forces = true;
  ReverseCheck reverse_check = ReverseCheck::Full;
  NewtonConfig newton;

  void validate() const;
};

/// Quantities evaluated at a position and reused between the forward step,
/// the reverse step and the next Markov transition.
struct Site {
  Vector q;
  Matrix jacobian;
  /// grad V(q), or zero when the proposal ignores forces.
  Vector force_gradient;
};

Site make_site(const ConstraintModel& model, const Vector& q, bool use_forces);

struct RattleStep {
  /// (q1, -p1) on success.
  std::optional<PhasePoint> point;
  ProjectionOutcome projection;
  /// lambda^{1/2} = theta / dt and lambda^1 (position and momentum multipliers).
  Vector half_multiplier;
  Vector end_multiplier;
  /// Site at q1, valid when `point` is set.
  Site end_site;

  bool ok() const { return point.has_value(); }
};

/// One RATTLE step from `x` followed by momentum reversal. Fails only when
/// the Newton projection fails; a singular Gram matrix at q1 throws
/// SingularGram.
RattleStep rattle_one_step(const ConstraintModel& model, const PhasePoint& x, const Site& site,
                           const RattleConfig& cfg);
RattleStep rattle_one_step(const ConstraintModel& model, const PhasePoint& x,
                           const RattleConfig& cfg);

enum class StepClass { Proposed, NewtonForwardFail, NewtonReverseFail, NonReversible };

std::string_view to_string(StepClass c);

struct RattleStepResult {
  StepClass classification = StepClass::NewtonForwardFail;
  /// Output of the forward step when it succeeded, whatever the final
  /// classification.
  std::optional<PhasePoint> forward_point;
  std::optional<Vector> half_multiplier;
  std::optional<Vector> end_multiplier;
  /// Position reached by the reverse step, when it ran and succeeded.
  std::optional<Vector> reverse_position;
  /// Site at the proposed position, valid when Proposed.
  std::optional<Site> proposal_site;

  bool proposed() const { return classification == StepClass::Proposed; }
  /// The point the chain moves to: the forward point when Proposed, empty
  /// otherwise (the map is the identity there).
  const std::optional<PhasePoint>& proposal() const {
    static const std::optional<PhasePoint> none;
    return proposed() ? forward_point : none;
  }
};

RattleStepResult psi_rev(const ConstraintModel& model, const PhasePoint& x, const Site& site,
                         const RattleConfig& cfg);
RattleStepResult psi_rev(const ConstraintModel& model, const PhasePoint& x,
                         const RattleConfig& cfg);

/// K reverse-checked RATTLE steps forming one proposal. Between sub-steps the
/// momentum is flipped back so the trajectory keeps moving forward; the final
/// output carries the reversed momentum, which keeps the composite map an
/// involution. Any failing sub-step aborts with that sub-step's
/// classification and no proposal.
RattleStepResult psi_rev_k(const ConstraintModel& model, const PhasePoint& x, const Site& site,
                           const RattleConfig& cfg, int steps);
RattleStepResult psi_rev_k(const ConstraintModel& model, const PhasePoint& x,
                           const RattleConfig& cfg, int steps);

}  // namespace mghmc
