#include "mghmc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

namespace mghmc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Runs task(i) for i in [0, n) on up to `threads` workers. Results are
// written by index, so assembly does not depend on scheduling.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& task) {
  const unsigned workers = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

Vector default_start(const ConstraintModel& model, const ExperimentConfig& cfg) {
  if (auto tp = torus_params_for(cfg.model, cfg.model_options)) return TorusModel(*tp).default_start();
  Vector q = Vector::Zero(model.dim());
  q[0] = 1.0;
  return q;
}

TorusParams require_torus(const ExperimentConfig& cfg) {
  auto tp = torus_params_for(cfg.model, cfg.model_options);
  if (!tp) throw InvalidParams("experiment '" + std::string(to_string(cfg.experiment)) + "' needs a torus model");
  return *tp;
}

ChainState start_chain(const ConstraintModel& model, const ExperimentConfig& cfg, const SamplerConfig& sc,
                       std::uint64_t stream) {
  ChainState state = make_chain_state(model, default_start(model, cfg), cfg.seed, stream, cfg.initial_momentum);
  for (std::uint64_t i = 0; i < cfg.burn_in; ++i) chain_step(model, state, sc);
  state.step_index = 0;
  return state;
}

bool is_ghmc(const SchemeChoice& s) {
  return s.scheme == Scheme::GHMC_LieTrotter || s.scheme == Scheme::GHMC_Strang;
}

}  // namespace

std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Histogram:
      return "histogram";
    case ExperimentKind::RejectionTable:
      return "rejection-table";
    case ExperimentKind::ResidenceSweep:
      return "residence-sweep";
    case ExperimentKind::Trajectory:
      return "trajectory";
  }
  return "unknown";
}

SchemeChoice parse_scheme(std::string_view name) {
  if (name == "mrw") return {"mrw", Scheme::MALA, false};
  if (name == "hmc") return {"hmc", Scheme::HMC, true};
  if (name == "mala") return {"mala", Scheme::MALA, true};
  if (name == "ghmc-strang") return {"ghmc-strang", Scheme::GHMC_Strang, true};
  if (name == "ghmc-lt") return {"ghmc-lt", Scheme::GHMC_LieTrotter, true};
  throw InvalidParams("unknown scheme '" + std::string(name) +
                      "' (expected mrw, hmc, mala, ghmc-strang or ghmc-lt)");
}

ReverseCheck parse_reverse_check(std::string_view name) {
  if (name == "full") return ReverseCheck::Full;
  if (name == "partial") return ReverseCheck::PartialNoPositionCheck;
  if (name == "none") return ReverseCheck::NoneAtAll;
  throw InvalidParams("unknown reverse check '" + std::string(name) + "' (expected full, partial or none)");
}

void ExperimentConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidParams("--dt must be > 0");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidParams("--alpha must lie in [0, 1]");
  if (friction && !(*friction >= 0.0)) throw InvalidParams("--gamma must be >= 0");
  if (rattle_steps < 1) throw InvalidParams("--k-steps must be >= 1");
  if (momentum_cap && !(*momentum_cap > 0.0)) throw InvalidParams("--momentum-cap must be > 0");
  if (n_iter < 1) throw InvalidParams("--niter must be >= 1");
  if (n_bins < 2) throw InvalidParams("--nbins must be >= 2");
  if (schemes.empty()) throw InvalidParams("--scheme must name at least one scheme");
  if (!(reverse_tolerance > 0.0)) throw InvalidParams("reverse tolerance must be > 0");
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    if (!(sweep[i] > 0.0)) throw InvalidParams("--sweep timesteps must be > 0");
    if (i > 0 && !(sweep[i] > sweep[i - 1])) throw InvalidParams("--sweep must be strictly increasing");
  }
  for (double a : alphas) {
    if (!(a >= 0.0 && a <= 1.0)) throw InvalidParams("--alphas entries must lie in [0, 1]");
  }
  if (threads < 1) throw InvalidParams("--threads must be >= 1");
  newton.validate();
  make_model(model, model_options);
  if (experiment != ExperimentKind::Trajectory) require_torus(*this);
  if (experiment == ExperimentKind::ResidenceSweep && sweep.empty()) {
    throw InvalidParams("residence sweep needs --sweep");
  }
  if (momentum_cap) {
    for (const auto& s : schemes) {
      if (is_ghmc(s)) throw InvalidParams("--momentum-cap only applies to mrw, hmc and mala");
    }
  }
}

SamplerConfig sampler_config(const ExperimentConfig& cfg, const SchemeChoice& scheme, double dt,
                             std::optional<double> alpha_override) {
  SamplerConfig s;
  s.scheme = scheme.scheme;
  s.seed = cfg.seed;
  s.rattle_steps = cfg.rattle_steps;
  s.momentum_cap = is_ghmc(scheme) ? std::nullopt : cfg.momentum_cap;
  s.rattle.dt = dt;
  s.rattle.use_forces = scheme.use_forces;
  s.rattle.reverse_check = cfg.reverse_check;
  s.rattle.reverse_tolerance = cfg.reverse_tolerance;
  s.rattle.newton = cfg.newton;
  if (alpha_override) {
    s.alpha = *alpha_override;
  } else if (cfg.friction) {
    s.alpha = std::exp(-*cfg.friction * dt);
  } else {
    s.alpha = cfg.alpha;
  }
  if (cfg.friction) {
    s.friction = *cfg.friction;
  } else if (s.alpha > 0.0) {
    s.friction = -std::log(s.alpha) / dt;
  } else if (scheme.scheme == Scheme::GHMC_Strang) {
    throw InvalidParams("ghmc-strang with alpha = 0 needs an explicit --gamma");
  }
  return s;
}

HistogramResult run_histogram(const ExperimentConfig& cfg) {
  cfg.validate();
  const TorusParams tp = require_torus(cfg);
  const ModelPtr model = make_model(cfg.model, cfg.model_options);
  const SamplerConfig sc = sampler_config(cfg, cfg.schemes.front(), cfg.dt);
  ChainState state = start_chain(*model, cfg, sc, 0);

  const std::uint64_t batch = cfg.batch_length ? cfg.batch_length : std::max<std::uint64_t>(1, cfg.n_iter / 100);
  BatchedHistogram hist(0.0, kTwoPi, cfg.n_bins, batch);
  const std::uint64_t ks_stride = std::max<std::uint64_t>(1, cfg.n_iter / std::max<std::uint64_t>(1, cfg.ks_samples));
  std::vector<double> thetas;
  thetas.reserve(cfg.n_iter / ks_stride + 1);

  HistogramResult res;
  for (std::uint64_t i = 0; i < cfg.n_iter; ++i) {
    res.tally.record(chain_step(*model, state, sc));
    const TorusAngles a = angle_coordinates(state.x.q, tp);
    hist.add(a.phi);
    if (state.step_index % ks_stride == 0) thetas.push_back(a.theta);
  }
  res.samples = hist.total();

  const bool exact_reference = tp.potential == TorusPotential::Zero || tp.stiffness == 0.0;
  std::vector<double> expected(hist.bins());
  for (std::size_t i = 0; i < hist.bins(); ++i) {
    HistogramBin b;
    b.phi_lo = hist.bin_lo(i);
    b.phi_hi = i + 1 == hist.bins() ? kTwoPi : hist.bin_lo(i + 1);
    b.count = hist.count(i);
    b.density = hist.density(i);
    expected[i] = torus_phi_mass(b.phi_lo, b.phi_hi, tp);
    if (exact_reference) b.reference_density = expected[i] / (b.phi_hi - b.phi_lo);
    res.bins.push_back(b);
  }
  if (exact_reference) res.chi_square = chi_square_test(hist, expected);
  res.critical_value_01 = chi_square_critical(static_cast<double>(hist.bins() - 1), 0.01);
  res.theta_uniformity = ks_test_uniform(std::move(thetas), 0.0, kTwoPi);
  return res;
}

std::vector<RejectionRow> run_rejection_table(const ExperimentConfig& cfg) {
  cfg.validate();
  const ModelPtr model = make_model(cfg.model, cfg.model_options);
  const std::vector<double> dts = cfg.sweep.empty() ? std::vector<double>{0.1, 0.3, 1.0} : cfg.sweep;

  struct Cell {
    SchemeChoice scheme;
    double dt;
    std::optional<double> alpha;
  };
  std::vector<Cell> cells;
  for (double dt : dts) {
    for (const auto& s : cfg.schemes) {
      if (s.scheme == Scheme::GHMC_LieTrotter) {
        for (double a : cfg.alphas) cells.push_back({s, dt, a});
      } else {
        cells.push_back({s, dt, std::nullopt});
      }
    }
  }

  std::vector<RejectionRow> rows(cells.size());
  parallel_for(cells.size(), cfg.threads, [&](std::size_t i) {
    const Cell& c = cells[i];
    const SamplerConfig sc = sampler_config(cfg, c.scheme, c.dt, c.alpha);
    ChainState state = start_chain(*model, cfg, sc, derive_stream(0, i));
    RejectionRow& row = rows[i];
    row.label = c.scheme.label;
    row.dt = c.dt;
    if (is_ghmc(c.scheme)) row.alpha = sc.alpha;
    row.tally = run_chain(*model, state, sc, cfg.n_iter);
  });
  return rows;
}

std::vector<ResidenceEstimate> run_residence_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const TorusParams tp = require_torus(cfg);
  const ModelPtr model = make_model(cfg.model, cfg.model_options);

  struct Cell {
    SchemeChoice scheme;
    double dt;
  };
  std::vector<Cell> cells;
  for (const auto& s : cfg.schemes) {
    for (double dt : cfg.sweep) cells.push_back({s, dt});
  }

  std::vector<ResidenceEstimate> out(cells.size());
  parallel_for(cells.size(), cfg.threads, [&](std::size_t i) {
    const Cell& c = cells[i];
    const SamplerConfig sc = sampler_config(cfg, c.scheme, c.dt);
    ChainState state = start_chain(*model, cfg, sc, derive_stream(0, i));
    ResidenceTracker tracker(tp.major_radius);
    RejectionTally tally;
    for (std::uint64_t n = 0; n < cfg.n_iter; ++n) {
      tally.record(chain_step(*model, state, sc));
      tracker.observe(state.step_index, state.x.q[0]);
    }
    ResidenceEstimate& e = out[i];
    e.label = c.scheme.label;
    e.dt = c.dt;
    if (c.scheme.scheme == Scheme::GHMC_LieTrotter) e.alpha = sc.alpha;
    if (is_ghmc(c.scheme)) e.friction = sc.friction;
    e.n_iter = cfg.n_iter;
    e.switches = tracker.switches();
    if (e.switches > 0) e.mean_residence = tracker.mean_residence();
    e.nonrev_rejection_rate = tally.rate(StepOutcome::NonReversible);
    e.total_rejection_rate = tally.rejection_rate();
  });
  return out;
}

TrajectoryResult run_trajectory(const ExperimentConfig& cfg) {
  cfg.validate();
  const ModelPtr model = make_model(cfg.model, cfg.model_options);
  const SamplerConfig sc = sampler_config(cfg, cfg.schemes.front(), cfg.dt);
  ChainState state = start_chain(*model, cfg, sc, 0);
  TrajectoryResult res;
  const std::uint64_t cap = std::max<std::uint64_t>(1, cfg.max_trajectory_points);
  res.thinning = (cfg.n_iter + cap - 1) / cap;
  res.points.reserve(static_cast<std::size_t>(std::min(cfg.n_iter / res.thinning + 1, cap)));
  res.tally = run_chain(*model, state, sc, cfg.n_iter,
                        [&](std::uint64_t n, const Vector& q, const Vector& p, StepOutcome o) {
                          res.points.push_back({n, q, p, o});
                        },
                        res.thinning);
  return res;
}

}  // namespace mghmc
