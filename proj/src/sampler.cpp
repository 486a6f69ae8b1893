#include "mghmc/sampler.hpp"

#include <cmath>
#include <sstream>

namespace mghmc {

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::HMC:
      return "hmc";
    case Scheme::MALA:
      return "mala";
    case Scheme::GHMC_Strang:
      return "ghmc-strang";
    case Scheme::GHMC_LieTrotter:
      return "ghmc-lt";
  }
  return "unknown";
}

std::string_view to_string(StepOutcome o) {
  switch (o) {
    case StepOutcome::Accepted:
      return "accepted";
    case StepOutcome::NewtonForward:
      return "newton-forward";
    case StepOutcome::NewtonReverse:
      return "newton-reverse";
    case StepOutcome::NonReversible:
      return "non-reversible";
    case StepOutcome::Metropolis:
      return "metropolis";
  }
  return "unknown";
}

void SamplerConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidParams("alpha must lie in [0, 1]");
  if (!(friction >= 0.0) || !std::isfinite(friction)) throw InvalidParams("friction must be >= 0");
  if (rattle_steps < 1) throw InvalidParams("RATTLE sub-steps K must be >= 1");
  if (momentum_cap) {
    if (!(*momentum_cap > 0.0)) throw InvalidParams("momentum cap must be > 0");
    if (scheme == Scheme::GHMC_Strang || scheme == Scheme::GHMC_LieTrotter) {
      throw InvalidParams("momentum cap only applies to full momentum refresh (hmc, mala)");
    }
  }
  rattle.validate();
}

std::uint64_t RejectionTally::attempts() const {
  std::uint64_t n = 0;
  for (auto c : counts) n += c;
  return n;
}

double RejectionTally::rate(StepOutcome o) const {
  const auto n = attempts();
  return n == 0 ? 0.0 : static_cast<double>(count(o)) / static_cast<double>(n);
}

double RejectionTally::rejection_rate() const {
  const auto n = attempts();
  return n == 0 ? 0.0 : static_cast<double>(rejections()) / static_cast<double>(n);
}

void RejectionTally::merge(const RejectionTally& other) {
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
}

ChainState make_chain_state(const ConstraintModel& model, const Vector& q0, std::uint64_t seed,
                            std::uint64_t stream, std::optional<Vector> p0) {
  if (q0.size() != model.dim()) throw InvalidParams("initial position has the wrong dimension");
  ChainState s;
  s.x.q = q0;
  s.x.p = p0 ? std::move(*p0) : Vector::Zero(q0.size());
  if (s.x.p.size() != model.dim()) throw InvalidParams("initial momentum has the wrong dimension");
  s.rng = Rng(seed, stream);
  return s;
}

Vector sample_tangent_gaussian(const Matrix& jacobian, const MassMatrix& mass, Rng& rng,
                               double condition_limit) {
  Vector g(mass.dim());
  for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = rng.normal();
  return cotangent_project(jacobian, mass, mass.apply_sqrt(g), condition_limit);
}

Vector sample_tangent_gaussian(const ConstraintModel& model, const Vector& q, Rng& rng,
                               double condition_limit) {
  return sample_tangent_gaussian(model.constraint_jacobian(q), model.mass(), rng, condition_limit);
}

TruncatedDraw sample_tangent_gaussian_truncated(const Matrix& jacobian, const MassMatrix& mass,
                                                double cap, Rng& rng, double condition_limit) {
  if (!(cap > 0.0)) throw InvalidParams("momentum cap must be > 0");
  TruncatedDraw d;
  while (d.trials < kTruncationBudget) {
    ++d.trials;
    d.p = sample_tangent_gaussian(jacobian, mass, rng, condition_limit);
    if (d.p.squaredNorm() <= cap) return d;
  }
  std::ostringstream os;
  os << "no momentum with |p|^2 <= " << cap << " after " << kTruncationBudget << " trials";
  throw RejectionBudgetExceeded(os.str());
}

TruncatedDraw sample_tangent_gaussian_truncated(const ConstraintModel& model, const Vector& q,
                                                double cap, Rng& rng, double condition_limit) {
  return sample_tangent_gaussian_truncated(model.constraint_jacobian(q), model.mass(), cap, rng,
                                           condition_limit);
}

namespace {

void ensure_cache(const ConstraintModel& model, ChainState& state, const SamplerConfig& cfg) {
  const bool forces = cfg.rattle.use_forces;
  if (!state.site || state.site_has_forces != forces || state.site->q != state.x.q) {
    state.site = make_site(model, state.x.q, forces);
    state.site_has_forces = forces;
    state.potential.reset();
  }
  if (!state.potential) state.potential = model.potential(state.x.q);
}

StepOutcome outcome_of(StepClass c) {
  switch (c) {
    case StepClass::Proposed:
      return StepOutcome::Accepted;
    case StepClass::NewtonForwardFail:
      return StepOutcome::NewtonForward;
    case StepClass::NewtonReverseFail:
      return StepOutcome::NewtonReverse;
    case StepClass::NonReversible:
      return StepOutcome::NonReversible;
  }
  return StepOutcome::NewtonForward;
}

// Reverse-checked proposal from (state.x.q, p) followed by the Metropolis
// test. On acceptance the state moves to the proposal (reversed momentum);
// otherwise it is left at (q, p).
StepOutcome propose_and_accept(const ConstraintModel& model, ChainState& state,
                               const SamplerConfig& cfg, Vector p, int steps) {
  const MassMatrix& mass = model.mass();
  PhasePoint start{state.x.q, std::move(p)};
  RattleStepResult r = psi_rev_k(model, start, *state.site, cfg.rattle, steps);
  StepOutcome outcome = outcome_of(r.classification);
  if (r.proposed()) {
    const PhasePoint& y = *r.forward_point;
    const double v1 = model.potential(y.q);
    const double delta_h = (v1 + mass.kinetic_energy(y.p)) - (*state.potential + mass.kinetic_energy(start.p));
    if (std::log(state.rng.uniform_open()) <= -delta_h) {
      state.x = y;
      state.site = std::move(r.proposal_site);
      state.site_has_forces = cfg.rattle.use_forces;
      state.potential = v1;
      return StepOutcome::Accepted;
    }
    outcome = StepOutcome::Metropolis;
  }
  state.x.p = std::move(start.p);
  return outcome;
}

// Mid-point OU update of the momentum over dt/2 with the momentum constraint
// enforced through the multiplier of the resolvent-weighted system.
Vector ou_half_step(const ConstraintModel& model, const Site& site, const Vector& p,
                    const SamplerConfig& cfg, Rng& rng) {
  const MassMatrix& mass = model.mass();
  const double dt = cfg.rattle.dt;
  const double c = dt * cfg.friction / 4.0;
  Vector g(p.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = rng.normal();
  const Matrix resolvent = mass.ou_resolvent(c);
  Vector out = resolvent * (mass.ou_explicit(c) * p + std::sqrt(cfg.friction * dt) * g);
  const Vector lambda =
      momentum_lagrange_ou(site.jacobian, mass, out, cfg.friction, dt, cfg.rattle.newton.condition_limit);
  out += resolvent * (site.jacobian * lambda);
  return out;
}

}  // namespace

StepOutcome hmc_step(const ConstraintModel& model, ChainState& state, const SamplerConfig& cfg) {
  if (cfg.scheme != Scheme::HMC && cfg.scheme != Scheme::MALA) {
    throw InvalidParams("hmc_step needs scheme hmc or mala");
  }
  ensure_cache(model, state, cfg);
  const double limit = cfg.rattle.newton.condition_limit;
  Vector p = cfg.momentum_cap
                 ? sample_tangent_gaussian_truncated(state.site->jacobian, model.mass(),
                                                     *cfg.momentum_cap, state.rng, limit)
                       .p
                 : sample_tangent_gaussian(state.site->jacobian, model.mass(), state.rng, limit);
  const int steps = cfg.scheme == Scheme::MALA ? 1 : cfg.rattle_steps;
  const StepOutcome o = propose_and_accept(model, state, cfg, std::move(p), steps);
  ++state.step_index;
  return o;
}

StepOutcome ghmc_step(const ConstraintModel& model, ChainState& state, const SamplerConfig& cfg) {
  ensure_cache(model, state, cfg);
  const MassMatrix& mass = model.mass();
  const double limit = cfg.rattle.newton.condition_limit;
  Vector p;
  switch (cfg.scheme) {
    case Scheme::GHMC_LieTrotter: {
      Vector g(mass.dim());
      for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = state.rng.normal();
      p = cotangent_project(state.site->jacobian, mass,
                            cfg.alpha * state.x.p + std::sqrt(1.0 - cfg.alpha * cfg.alpha) * mass.apply_sqrt(g),
                            limit);
      break;
    }
    case Scheme::GHMC_Strang:
      p = ou_half_step(model, *state.site, state.x.p, cfg, state.rng);
      break;
    default:
      throw InvalidParams("ghmc_step needs scheme ghmc-strang or ghmc-lt");
  }

  const StepOutcome o = propose_and_accept(model, state, cfg, std::move(p), cfg.rattle_steps);
  state.x.p = -state.x.p;
  if (cfg.scheme == Scheme::GHMC_Strang) {
    state.x.p = ou_half_step(model, *state.site, state.x.p, cfg, state.rng);
  }
  ++state.step_index;
  return o;
}

StepOutcome chain_step(const ConstraintModel& model, ChainState& state, const SamplerConfig& cfg) {
  switch (cfg.scheme) {
    case Scheme::HMC:
    case Scheme::MALA:
      return hmc_step(model, state, cfg);
    case Scheme::GHMC_Strang:
    case Scheme::GHMC_LieTrotter:
      return ghmc_step(model, state, cfg);
  }
  throw InvalidParams("unknown scheme");
}

RejectionTally run_chain(const ConstraintModel& model, ChainState& state, const SamplerConfig& cfg,
                         std::uint64_t n_iter, const TrajectorySink& sink, std::uint64_t thinning) {
  if (n_iter < 1) throw InvalidParams("n_iter must be >= 1");
  if (thinning < 1) throw InvalidParams("thinning must be >= 1");
  cfg.validate();
  RejectionTally tally;
  for (std::uint64_t i = 0; i < n_iter; ++i) {
    const StepOutcome o = chain_step(model, state, cfg);
    tally.record(o);
    if (sink && state.step_index % thinning == 0) sink(state.step_index, state.x.q, state.x.p, o);
  }
  return tally;
}

}  // namespace mghmc
