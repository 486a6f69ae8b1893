#include "mghmc/cli.hpp"

#include "mghmc/experiments.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <iostream>
#include <sstream>

namespace mghmc {

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& flag, const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw InvalidParams(flag + ": '" + item + "' is not a number");
    out.push_back(v);
  }
  if (out.empty()) throw InvalidParams(flag + ": empty list");
  return out;
}

ExperimentKind parse_experiment(const std::string& s) {
  if (s == "histogram") return ExperimentKind::Histogram;
  if (s == "rejection-table" || s == "table") return ExperimentKind::RejectionTable;
  if (s == "residence-sweep" || s == "residence") return ExperimentKind::ResidenceSweep;
  if (s == "trajectory") return ExperimentKind::Trajectory;
  throw InvalidParams("--experiment: unknown experiment '" + s +
                      "' (expected histogram, rejection-table, residence-sweep or trajectory)");
}

unsigned thread_count(unsigned flag_value) {
  if (const char* env = std::getenv("MANIFOLD_GHMC_THREADS"); env && *env) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    throw InvalidParams("MANIFOLD_GHMC_THREADS must be a positive integer");
  }
  return flag_value;
}

struct RawFlags {
  std::string experiment = "histogram";
  std::string model = "torus-zero";
  std::string scheme = "ghmc-lt";
  std::string reverse_check = "full";
  std::string format = "csv";
  std::string sweep;
  std::string alphas;
  std::string newton_criterion = "position";
  std::optional<double> gamma;
  std::optional<double> momentum_cap;
  std::optional<double> stiffness;
};

std::string run(const ExperimentConfig& cfg, std::string& summary) {
  std::ostringstream s;
  std::string text;
  switch (cfg.experiment) {
    case ExperimentKind::Histogram: {
      const auto r = run_histogram(cfg);
      text = format_histogram(cfg, r);
      s << "histogram: " << r.samples << " samples, rejection " << format_double(r.tally.rejection_rate());
      if (r.chi_square) {
        s << ", chi2_corrected " << format_double(r.chi_square->corrected_statistic) << " (p "
          << format_double(r.chi_square->p_value) << ")";
      }
      break;
    }
    case ExperimentKind::RejectionTable: {
      const auto rows = run_rejection_table(cfg);
      text = format_rejection_table(cfg, rows);
      s << "rejection-table: " << rows.size() << " rows";
      break;
    }
    case ExperimentKind::ResidenceSweep: {
      const auto rows = run_residence_sweep(cfg);
      text = format_residence(cfg, rows);
      std::size_t empty = 0;
      for (const auto& e : rows) empty += e.switches == 0;
      s << "residence-sweep: " << rows.size() << " points";
      if (empty) s << " (" << empty << " without switches)";
      break;
    }
    case ExperimentKind::Trajectory: {
      const auto r = run_trajectory(cfg);
      text = format_trajectory(cfg, r);
      s << "trajectory: " << r.points.size() << " points (thinning " << r.thinning << ")";
      break;
    }
  }
  summary = s.str();
  return text;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Constrained HMC / GHMC experiments on embedded manifolds", "manifold-ghmc"};
  ExperimentConfig cfg;
  RawFlags raw;
  unsigned threads = 1;

  app.add_option("--experiment", raw.experiment, "histogram | rejection-table | residence-sweep | trajectory");
  app.add_option("--model", raw.model, "circle | torus-zero | torus-quadratic | torus-doublewell | sphere");
  app.add_option("--scheme", raw.scheme, "mrw | hmc | mala | ghmc-strang | ghmc-lt (comma list for table/sweep)");
  app.add_option("--dt", cfg.dt, "timestep");
  app.add_option("--alpha", cfg.alpha, "GHMC-LT momentum memory");
  app.add_option("--alphas", raw.alphas, "GHMC-LT alpha grid for the rejection table");
  app.add_option("--gamma", raw.gamma, "friction; GHMC-LT then uses alpha = exp(-gamma dt)");
  app.add_option("--k-steps", cfg.rattle_steps, "RATTLE steps per proposal");
  app.add_option("--niter", cfg.n_iter, "chain length per run");
  app.add_option("--burn-in", cfg.burn_in, "discarded steps before recording");
  app.add_option("--seed", cfg.seed, "RNG seed");
  app.add_option("--nbins", cfg.n_bins, "histogram bins");
  app.add_option("--batch-length", cfg.batch_length, "batch length for the correlation-corrected chi-square");
  app.add_option("--reverse-check", raw.reverse_check, "full | partial | none");
  app.add_option("--eta-rev", cfg.reverse_tolerance, "reverse check tolerance on positions");
  app.add_option("--newton-tol", cfg.newton.tolerance, "Newton tolerance");
  app.add_option("--newton-maxit", cfg.newton.max_iterations, "Newton iteration limit");
  app.add_option("--newton-criterion", raw.newton_criterion, "position | increment");
  app.add_option("--momentum-cap", raw.momentum_cap, "truncate momenta to |p|^2 <= cap");
  app.add_option("--stiffness", raw.stiffness, "potential constant k");
  app.add_option("--major-radius", cfg.model_options.major_radius, "torus R");
  app.add_option("--minor-radius", cfg.model_options.minor_radius, "torus r");
  app.add_option("--sweep", raw.sweep, "comma-separated timesteps");
  app.add_option("--max-points", cfg.max_trajectory_points, "trajectory points kept");
  app.add_option("--out", cfg.output_path, "output file (stdout when omitted)");
  app.add_option("--format", raw.format, "csv | json");
  app.add_option("--threads", threads, "worker threads (MANIFOLD_GHMC_THREADS overrides)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    cfg.experiment = parse_experiment(raw.experiment);
    cfg.model = raw.model;
    if (app.count("--scheme") == 0) {
      // Multi-scheme experiments default to the schemes compared in the paper.
      if (cfg.experiment == ExperimentKind::RejectionTable) raw.scheme = "mrw,mala,ghmc-lt";
      if (cfg.experiment == ExperimentKind::ResidenceSweep) raw.scheme = "mala,ghmc-lt";
    }
    cfg.schemes.clear();
    for (const auto& s : split_list(raw.scheme)) cfg.schemes.push_back(parse_scheme(s));
    cfg.reverse_check = parse_reverse_check(raw.reverse_check);
    if (raw.format == "csv") {
      cfg.format = OutputFormat::CSV;
    } else if (raw.format == "json") {
      cfg.format = OutputFormat::JSON;
    } else {
      throw InvalidParams("--format: expected csv or json");
    }
    if (raw.newton_criterion == "position") {
      cfg.newton.criterion = NewtonCriterion::PositionIncrement;
    } else if (raw.newton_criterion == "increment") {
      cfg.newton.criterion = NewtonCriterion::IncrementAndResidual;
    } else {
      throw InvalidParams("--newton-criterion: expected position or increment");
    }
    cfg.friction = raw.gamma;
    cfg.momentum_cap = raw.momentum_cap;
    cfg.model_options.stiffness = raw.stiffness;
    if (!raw.sweep.empty()) cfg.sweep = parse_doubles("--sweep", raw.sweep);
    if (!raw.alphas.empty()) cfg.alphas = parse_doubles("--alphas", raw.alphas);
    cfg.threads = thread_count(threads);
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    std::string summary;
    const std::string text = run(cfg, summary);
    if (cfg.output_path.empty()) {
      out << text;
    } else {
      write_atomic(cfg.output_path, text);
      summary += ", wrote " + cfg.output_path;
    }
    err << summary << '\n';
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
  return kExitOk;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace mghmc
