#pragma once

// Markov chains on T*M built from the reverse-checked RATTLE map: constrained
// HMC / MALA (full momentum refresh) and constrained GHMC (partial refresh,
// momentum flip after the Metropolis stage) with either the Lie-Trotter
// splitting p <- P(q)[alpha p + sqrt(1 - alpha^2) G] or the Strang splitting
// with mid-point OU half steps.

#include "mghmc/integrator.hpp"
#include "mghmc/rng.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mghmc {

class RejectionBudgetExceeded : public std::runtime_error {
 public:
  explicit RejectionBudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

enum class Scheme { HMC, MALA, GHMC_Strang, GHMC_LieTrotter };

std::string_view to_string(Scheme s);

struct SamplerConfig {
  Scheme scheme = Scheme::GHMC_LieTrotter;
  /// gamma, used by GHMC_Strang.
  double friction = 1.0;
  /// Momentum memory for GHMC_LieTrotter, alpha = exp(-gamma dt).
  double alpha = 0.5;
  /// RATTLE sub-steps per proposal (HMC and GHMC; MALA always uses 1).
  int rattle_steps = 1;
  /// Momenta are redrawn until |p|^2 <= cap (HMC / MALA only).
  std::optional<double> momentum_cap;
  std::uint64_t seed = 0;
  RattleConfig rattle;

  void validate() const;
};

enum class StepOutcome : std::uint8_t {
  Accepted = 0,
  NewtonForward = 1,
  NewtonReverse = 2,
  NonReversible = 3,
  Metropolis = 4,
};

std::string_view to_string(StepOutcome o);

struct RejectionTally {
  std::array<std::uint64_t, 5> counts{};

  void record(StepOutcome o) { ++counts[static_cast<std::size_t>(o)]; }
  std::uint64_t count(StepOutcome o) const { return counts[static_cast<std::size_t>(o)]; }
  std::uint64_t attempts() const;
  std::uint64_t rejections() const { return attempts() - count(StepOutcome::Accepted); }
  /// Fraction of attempts ending in `o`; 0 when there were no attempts.
  double rate(StepOutcome o) const;
  double rejection_rate() const;
  void merge(const RejectionTally& other);
};

/// Single-owner chain state. `site` caches the Jacobian and force at x.q and
/// `potential` caches V(x.q); both are refreshed whenever the position moves.
struct ChainState {
  PhasePoint x;
  std::uint64_t step_index = 0;
  Rng rng;
  std::optional<Site> site;
  /// Whether `site` holds the true force or the zero force of a random-walk
  /// proposal.
  bool site_has_forces = false;
  std::optional<double> potential;
};

/// Chain state at (q0, p0) with RNG stream (seed, stream). p0 defaults to zero.
ChainState make_chain_state(const ConstraintModel& model, const Vector& q0, std::uint64_t seed,
                            std::uint64_t stream = 0, std::optional<Vector> p0 = std::nullopt);

/// G ~ N(0, Id), returned as the projection of M^{1/2} G onto T*_q M, which is
/// distributed as the Gaussian on the cotangent space induced by the kinetic
/// energy.
Vector sample_tangent_gaussian(const Matrix& jacobian, const MassMatrix& mass, Rng& rng,
                               double condition_limit = kDefaultConditionLimit);
Vector sample_tangent_gaussian(const ConstraintModel& model, const Vector& q, Rng& rng,
                               double condition_limit = kDefaultConditionLimit);

struct TruncatedDraw {
  Vector p;
  std::uint64_t trials = 0;
};

inline constexpr std::uint64_t kTruncationBudget = 1'000'000;

/// Rejection sampling of the cotangent Gaussian restricted to |p|^2 <= cap.
/// Throws RejectionBudgetExceeded after kTruncationBudget trials.
TruncatedDraw sample_tangent_gaussian_truncated(const Matrix& jacobian, const MassMatrix& mass,
                                                double cap, Rng& rng,
                                                double condition_limit = kDefaultConditionLimit);
TruncatedDraw sample_tangent_gaussian_truncated(const ConstraintModel& model, const Vector& q,
                                                double cap, Rng& rng,
                                                double condition_limit = kDefaultConditionLimit);

/// One constrained HMC / MALA transition. On rejection the chain keeps the
/// freshly drawn momentum.
StepOutcome hmc_step(const ConstraintModel& model, ChainState& state, const SamplerConfig& cfg);

/// One constrained GHMC transition (either splitting). The momentum is
/// reversed after the Metropolis stage whether or not the move was accepted.
StepOutcome ghmc_step(const ConstraintModel& model, ChainState& state, const SamplerConfig& cfg);

/// Dispatches on cfg.scheme.
StepOutcome chain_step(const ConstraintModel& model, ChainState& state, const SamplerConfig& cfg);

/// Receives (step_index, q, p, outcome) after each retained transition.
using TrajectorySink =
    std::function<void(std::uint64_t, const Vector&, const Vector&, StepOutcome)>;

/// Runs n_iter transitions (n_iter >= 1, else InvalidParams), calling `sink`
/// every `thinning` steps. Deterministic for a fixed initial state.
RejectionTally run_chain(const ConstraintModel& model, ChainState& state, const SamplerConfig& cfg,
                         std::uint64_t n_iter, const TrajectorySink& sink = {},
                         std::uint64_t thinning = 1);

}  // namespace mghmc
