#pragma once

// Experiment drivers on the torus: phi histogram against the exact marginal,
// rejection-rate breakdown per scheme, mean residence time in the double-well
// potential as a function of the timestep, and raw trajectories.

#include "mghmc/models.hpp"
#include "mghmc/sampler.hpp"
#include "mghmc/statistics.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mghmc {

enum class ExperimentKind { Histogram, RejectionTable, ResidenceSweep, Trajectory };
enum class OutputFormat { CSV, JSON };

std::string_view to_string(ExperimentKind k);

/// A sampler as named on the command line. "mrw" is one-step HMC with a
/// zero-force proposal.
struct SchemeChoice {
  std::string label;
  Scheme scheme = Scheme::MALA;
  bool use_forces = true;
};

/// Accepts mrw, hmc, mala, ghmc-strang, ghmc-lt. Throws InvalidParams.
SchemeChoice parse_scheme(std::string_view name);
ReverseCheck parse_reverse_check(std::string_view name);

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Histogram;
  std::string model = "torus-zero";
  ModelOptions model_options;
  /// One scheme for histogram / trajectory; several for table and sweep.
  std::vector<SchemeChoice> schemes{parse_scheme("ghmc-lt")};
  double dt = 1.0;
  double alpha = 0.5;
  /// When set, GHMC-LT uses alpha = exp(-gamma dt) and GHMC-Strang uses it
  /// as friction.
  std::optional<double> friction;
  int rattle_steps = 1;
  std::optional<double> momentum_cap;
  std::uint64_t seed = 0;
  ReverseCheck reverse_check = ReverseCheck::Full;
  NewtonConfig newton{.criterion = NewtonCriterion::PositionIncrement};
  double reverse_tolerance = 1e-12;
  std::optional<Vector> initial_momentum;

  std::uint64_t n_iter = 1'000'000;
  std::uint64_t burn_in = 0;
  std::size_t n_bins = 100;
  /// Batch length for the correlation-corrected chi-square; 0 picks
  /// n_iter / 100.
  std::uint64_t batch_length = 0;
  /// Samples used by the theta uniformity test (thinned evenly).
  std::uint64_t ks_samples = 100'000;
  /// Timesteps for the rejection table and residence sweep.
  std::vector<double> sweep;
  /// alpha grid for GHMC-LT rows of the rejection table.
  std::vector<double> alphas{0.1, 0.5, 0.9};
  std::uint64_t max_trajectory_points = 100'000;

  std::string output_path;
  OutputFormat format = OutputFormat::CSV;
  unsigned threads = 1;

  /// Throws InvalidParams.
  void validate() const;
};

/// Sampler configuration for one scheme at one timestep.
SamplerConfig sampler_config(const ExperimentConfig& cfg, const SchemeChoice& scheme, double dt,
                             std::optional<double> alpha_override = std::nullopt);

struct HistogramBin {
  double phi_lo = 0.0;
  double phi_hi = 0.0;
  std::uint64_t count = 0;
  double density = 0.0;
  /// Mean of the reference density over the bin; only for V = 0.
  std::optional<double> reference_density;
};

struct HistogramResult {
  std::vector<HistogramBin> bins;
  std::uint64_t samples = 0;
  RejectionTally tally;
  /// Present when the reference marginal is exact (V = 0).
  std::optional<ChiSquareResult> chi_square;
  double critical_value_01 = 0.0;
  KsResult theta_uniformity;
};

HistogramResult run_histogram(const ExperimentConfig& cfg);

struct RejectionRow {
  std::string label;
  double dt = 0.0;
  std::optional<double> alpha;
  RejectionTally tally;

  double total() const { return tally.rejection_rate(); }
  double rate(StepOutcome o) const { return tally.rate(o); }
  double stderr_of(double rate) const { return binomial_stderr(rate, tally.attempts()); }
};

std::vector<RejectionRow> run_rejection_table(const ExperimentConfig& cfg);

struct ResidenceEstimate {
  std::string label;
  double dt = 0.0;
  std::optional<double> alpha;
  std::optional<double> friction;
  std::uint64_t n_iter = 0;
  std::uint64_t switches = 0;
  /// Empty when no switch was observed.
  std::optional<double> mean_residence;
  double nonrev_rejection_rate = 0.0;
  double total_rejection_rate = 0.0;
};

std::vector<ResidenceEstimate> run_residence_sweep(const ExperimentConfig& cfg);

struct TrajectoryPoint {
  std::uint64_t step = 0;
  Vector q;
  Vector p;
  StepOutcome outcome = StepOutcome::Accepted;
};

struct TrajectoryResult {
  std::vector<TrajectoryPoint> points;
  RejectionTally tally;
  std::uint64_t thinning = 1;
};

TrajectoryResult run_trajectory(const ExperimentConfig& cfg);

// Serialization --------------------------------------------------------------

inline constexpr std::string_view kFormatTag = "manifold-ghmc v1";

std::string format_histogram(const ExperimentConfig& cfg, const HistogramResult& r);
std::string format_rejection_table(const ExperimentConfig& cfg, const std::vector<RejectionRow>& rows);
std::string format_residence(const ExperimentConfig& cfg, const std::vector<ResidenceEstimate>& rows);
std::string format_trajectory(const ExperimentConfig& cfg, const TrajectoryResult& r);

/// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::string& path, const std::string& contents);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace mghmc
