#include "mghmc/integrator.hpp"

#include <cmath>

namespace mghmc {

std::string_view to_string(ReverseCheck mode) {
  switch (mode) {
    case ReverseCheck::Full:
      return "full";
    case ReverseCheck::PartialNoPositionCheck:
      return "partial";
    case ReverseCheck::NoneAtAll:
      return "none";
  }
  return "unknown";
}

std::string_view to_string(StepClass c) {
  switch (c) {
    case StepClass::Proposed:
      return "proposed";
    case StepClass::NewtonForwardFail:
      return "newton-forward";
    case StepClass::NewtonReverseFail:
      return "newton-reverse";
    case StepClass::NonReversible:
      return "non-reversible";
  }
  return "unknown";
}

void RattleConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidParams("timestep dt must be > 0");
  if (!(reverse_tolerance > 0.0)) throw InvalidParams("reverse tolerance must be > 0");
  newton.validate();
}

Site make_site(const ConstraintModel& model, const Vector& q, bool use_forces) {
  return {q, model.constraint_jacobian(q),
          use_forces ? model.potential_gradient(q) : Vector::Zero(q.size())};
}

RattleStep rattle_one_step(const ConstraintModel& model, const PhasePoint& x, const Site& site,
                           const RattleConfig& cfg) {
  const MassMatrix& mass = model.mass();
  const double dt = cfg.dt;
  RattleStep out;

  const Vector p_kick = x.p - 0.5 * dt * site.force_gradient;
  const Vector q_free = x.q + dt * mass.apply_inverse(p_kick);
  out.projection = newton_project(model, site.jacobian, q_free, cfg.newton);
  if (!out.projection.converged()) return out;

  const Vector& theta = out.projection.multiplier;
  const Vector normal_shift = site.jacobian * theta;
  Vector q1 = q_free + mass.apply_inverse(normal_shift);
  const Vector p_half = p_kick + normal_shift / dt;

  out.end_site = make_site(model, q1, cfg.use_forces);
  const Vector p_end = p_half - 0.5 * dt * out.end_site.force_gradient;
  out.end_multiplier = momentum_lagrange_rattle(out.end_site.jacobian, mass, p_end,
                                                cfg.newton.condition_limit);
  out.half_multiplier = theta / dt;
  out.point = PhasePoint{std::move(q1), -(p_end + out.end_site.jacobian * out.end_multiplier)};
  return out;
}

RattleStep rattle_one_step(const ConstraintModel& model, const PhasePoint& x,
                           const RattleConfig& cfg) {
  return rattle_one_step(model, x, make_site(model, x.q, cfg.use_forces), cfg);
}

RattleStepResult psi_rev(const ConstraintModel& model, const PhasePoint& x, const Site& site,
                         const RattleConfig& cfg) {
  RattleStepResult res;
  RattleStep forward = rattle_one_step(model, x, site, cfg);
  if (!forward.ok()) {
    res.classification = StepClass::NewtonForwardFail;
    return res;
  }
  res.forward_point = std::move(forward.point);
  res.half_multiplier = std::move(forward.half_multiplier);
  res.end_multiplier = std::move(forward.end_multiplier);

  if (cfg.reverse_check != ReverseCheck::NoneAtAll) {
    const RattleStep reverse = rattle_one_step(model, *res.forward_point, forward.end_site, cfg);
    if (!reverse.ok()) {
      res.classification = StepClass::NewtonReverseFail;
      return res;
    }
    res.reverse_position = reverse.point->q;
    // Positions alone decide reversibility; momenta then agree automatically.
    if (cfg.reverse_check == ReverseCheck::Full &&
        !((reverse.point->q - x.q).norm() < cfg.reverse_tolerance)) {
      res.classification = StepClass::NonReversible;
      return res;
    }
  }
  res.classification = StepClass::Proposed;
  res.proposal_site = std::move(forward.end_site);
  return res;
}

RattleStepResult psi_rev(const ConstraintModel& model, const PhasePoint& x,
                         const RattleConfig& cfg) {
  return psi_rev(model, x, make_site(model, x.q, cfg.use_forces), cfg);
}

RattleStepResult psi_rev_k(const ConstraintModel& model, const PhasePoint& x, const Site& site,
                           const RattleConfig& cfg, int steps) {
  if (steps < 1) throw InvalidParams("number of RATTLE sub-steps must be >= 1");
  RattleStepResult res = psi_rev(model, x, site, cfg);
  for (int i = 1; i < steps && res.proposed(); ++i) {
    const PhasePoint next{res.forward_point->q, -res.forward_point->p};
    res = psi_rev(model, next, *res.proposal_site, cfg);
  }
  return res;
}

RattleStepResult psi_rev_k(const ConstraintModel& model, const PhasePoint& x,
                           const RattleConfig& cfg, int steps) {
  return psi_rev_k(model, x, make_site(model, x.q, cfg.use_forces), cfg, steps);
}

}  // namespace mghmc
