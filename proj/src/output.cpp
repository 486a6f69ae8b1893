#include "mghmc/experiments.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

namespace mghmc {

using json = nlohmann::ordered_json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string scheme_list(const ExperimentConfig& cfg) {
  std::string s;
  for (const auto& c : cfg.schemes) {
    if (!s.empty()) s += '|';
    s += c.label;
  }
  return s;
}

// Provenance header shared by every CSV output.
std::string csv_header(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "# " << kFormatTag << ", experiment=" << to_string(cfg.experiment) << ", seed=" << cfg.seed << '\n';
  os << "# model=" << cfg.model << ", scheme=" << scheme_list(cfg) << ", dt=" << format_double(cfg.dt)
     << ", alpha=" << format_double(cfg.alpha) << ", gamma=" << opt(cfg.friction)
     << ", k_steps=" << cfg.rattle_steps << ", reverse_check=" << to_string(cfg.reverse_check)
     << ", n_iter=" << cfg.n_iter << ", burn_in=" << cfg.burn_in << '\n';
  return os.str();
}

json config_json(const ExperimentConfig& cfg) {
  json schemes = json::array();
  for (const auto& c : cfg.schemes) schemes.push_back(c.label);
  return json{{"model", cfg.model},
              {"schemes", schemes},
              {"dt", cfg.dt},
              {"alpha", cfg.alpha},
              {"gamma", opt_json(cfg.friction)},
              {"k_steps", cfg.rattle_steps},
              {"momentum_cap", opt_json(cfg.momentum_cap)},
              {"reverse_check", std::string(to_string(cfg.reverse_check))},
              {"n_iter", cfg.n_iter},
              {"burn_in", cfg.burn_in},
              {"n_bins", cfg.n_bins},
              {"sweep", cfg.sweep}};
}

json envelope(const ExperimentConfig& cfg) {
  return json{{"format", std::string(kFormatTag)},
              {"experiment", std::string(to_string(cfg.experiment))},
              {"seed", cfg.seed},
              {"config", config_json(cfg)}};
}

json tally_json(const RejectionTally& t) {
  return json{{"attempts", t.attempts()},
              {"accepted", t.count(StepOutcome::Accepted)},
              {"newton_forward", t.count(StepOutcome::NewtonForward)},
              {"newton_reverse", t.count(StepOutcome::NewtonReverse)},
              {"non_reversibility", t.count(StepOutcome::NonReversible)},
              {"metropolis", t.count(StepOutcome::Metropolis)}};
}

}  // namespace

std::string format_histogram(const ExperimentConfig& cfg, const HistogramResult& r) {
  if (cfg.format == OutputFormat::JSON) {
    json j = envelope(cfg);
    json bins = json::array();
    for (const auto& b : r.bins) {
      bins.push_back({{"phi_lo", b.phi_lo},
                      {"phi_hi", b.phi_hi},
                      {"count", b.count},
                      {"density", b.density},
                      {"reference_density", opt_json(b.reference_density)}});
    }
    j["bins"] = bins;
    json summary{{"samples", r.samples}, {"critical_0.01", r.critical_value_01},
                 {"theta_ks", r.theta_uniformity.statistic}, {"theta_ks_p", r.theta_uniformity.p_value},
                 {"tally", tally_json(r.tally)}};
    if (r.chi_square) {
      summary["chi2"] = r.chi_square->statistic;
      summary["chi2_corrected"] = r.chi_square->corrected_statistic;
      summary["design_effect"] = r.chi_square->design_effect;
      summary["dof"] = r.chi_square->degrees_of_freedom;
      summary["p_value"] = r.chi_square->p_value;
    }
    j["summary"] = summary;
    return j.dump(2) + "\n";
  }
  std::ostringstream os;
  os << csv_header(cfg);
  if (r.chi_square) {
    os << "# chi2=" << format_double(r.chi_square->statistic)
       << ", chi2_corrected=" << format_double(r.chi_square->corrected_statistic)
       << ", design_effect=" << format_double(r.chi_square->design_effect)
       << ", dof=" << format_double(r.chi_square->degrees_of_freedom)
       << ", p_value=" << format_double(r.chi_square->p_value)
       << ", critical_0.01=" << format_double(r.critical_value_01) << '\n';
  }
  os << "# theta_ks=" << format_double(r.theta_uniformity.statistic)
     << ", theta_ks_p=" << format_double(r.theta_uniformity.p_value)
     << ", rejection_rate=" << format_double(r.tally.rejection_rate()) << '\n';
  os << "bin,phi_lo,phi_hi,count,density,reference_density\n";
  for (std::size_t i = 0; i < r.bins.size(); ++i) {
    const auto& b = r.bins[i];
    os << i << ',' << format_double(b.phi_lo) << ',' << format_double(b.phi_hi) << ',' << b.count << ','
       << format_double(b.density) << ',' << opt(b.reference_density) << '\n';
  }
  return os.str();
}

std::string format_rejection_table(const ExperimentConfig& cfg, const std::vector<RejectionRow>& rows) {
  constexpr StepOutcome kColumns[] = {StepOutcome::NewtonForward, StepOutcome::NewtonReverse,
                                      StepOutcome::NonReversible, StepOutcome::Metropolis};
  constexpr const char* kNames[] = {"newton_forward", "newton_reverse", "non_reversibility", "metropolis"};
  if (cfg.format == OutputFormat::JSON) {
    json j = envelope(cfg);
    json arr = json::array();
    for (const auto& r : rows) {
      json row{{"scheme", r.label}, {"dt", r.dt}, {"alpha", opt_json(r.alpha)},
               {"n_iter", r.tally.attempts()}, {"total", r.total()}, {"total_se", r.stderr_of(r.total())}};
      for (std::size_t c = 0; c < 4; ++c) {
        row[kNames[c]] = r.rate(kColumns[c]);
        row[std::string(kNames[c]) + "_se"] = r.stderr_of(r.rate(kColumns[c]));
      }
      row["accepted"] = r.rate(StepOutcome::Accepted);
      arr.push_back(row);
    }
    j["rows"] = arr;
    return j.dump(2) + "\n";
  }
  std::ostringstream os;
  os << csv_header(cfg);
  os << "scheme,dt,alpha,n_iter,total,total_se";
  for (const char* n : kNames) os << ',' << n << ',' << n << "_se";
  os << ",accepted\n";
  for (const auto& r : rows) {
    os << r.label << ',' << format_double(r.dt) << ',' << opt(r.alpha) << ',' << r.tally.attempts() << ','
       << format_double(r.total()) << ',' << format_double(r.stderr_of(r.total()));
    for (auto c : kColumns) os << ',' << format_double(r.rate(c)) << ',' << format_double(r.stderr_of(r.rate(c)));
    os << ',' << format_double(r.rate(StepOutcome::Accepted)) << '\n';
  }
  return os.str();
}

std::string format_residence(const ExperimentConfig& cfg, const std::vector<ResidenceEstimate>& rows) {
  if (cfg.format == OutputFormat::JSON) {
    json j = envelope(cfg);
    json arr = json::array();
    for (const auto& e : rows) {
      arr.push_back({{"scheme", e.label},
                     {"dt", e.dt},
                     {"alpha", opt_json(e.alpha)},
                     {"gamma", opt_json(e.friction)},
                     {"n_iter", e.n_iter},
                     {"switches", e.switches},
                     {"mean_residence", opt_json(e.mean_residence)},
                     {"nonrev_rejection_rate", e.nonrev_rejection_rate},
                     {"total_rejection_rate", e.total_rejection_rate},
                     {"status", e.switches > 0 ? "ok" : "no-switches"}});
    }
    j["rows"] = arr;
    return j.dump(2) + "\n";
  }
  std::ostringstream os;
  os << csv_header(cfg);
  os << "scheme,dt,alpha,gamma,n_iter,switches,mean_residence,nonrev_rejection_rate,total_rejection_rate,status\n";
  for (const auto& e : rows) {
    os << e.label << ',' << format_double(e.dt) << ',' << opt(e.alpha) << ',' << opt(e.friction) << ','
       << e.n_iter << ',' << e.switches << ',' << opt(e.mean_residence) << ','
       << format_double(e.nonrev_rejection_rate) << ',' << format_double(e.total_rejection_rate) << ','
       << (e.switches > 0 ? "ok" : "no-switches") << '\n';
  }
  return os.str();
}

std::string format_trajectory(const ExperimentConfig& cfg, const TrajectoryResult& r) {
  const Eigen::Index d = r.points.empty() ? 0 : r.points.front().q.size();
  if (cfg.format == OutputFormat::JSON) {
    json j = envelope(cfg);
    j["thinning"] = r.thinning;
    j["tally"] = tally_json(r.tally);
    json arr = json::array();
    for (const auto& pt : r.points) {
      arr.push_back({{"step", pt.step},
                     {"q", std::vector<double>(pt.q.data(), pt.q.data() + pt.q.size())},
                     {"p", std::vector<double>(pt.p.data(), pt.p.data() + pt.p.size())},
                     {"outcome", std::string(to_string(pt.outcome))}});
    }
    j["points"] = arr;
    return j.dump(2) + "\n";
  }
  std::ostringstream os;
  os << csv_header(cfg);
  os << "# thinning=" << r.thinning << ", rejection_rate=" << format_double(r.tally.rejection_rate()) << '\n';
  os << "step";
  for (Eigen::Index i = 0; i < d; ++i) os << ",q" << i;
  for (Eigen::Index i = 0; i < d; ++i) os << ",p" << i;
  os << ",outcome\n";
  for (const auto& pt : r.points) {
    os << pt.step;
    for (Eigen::Index i = 0; i < d; ++i) os << ',' << format_double(pt.q[i]);
    for (Eigen::Index i = 0; i < d; ++i) os << ',' << format_double(pt.p[i]);
    os << ',' << to_string(pt.outcome) << '\n';
  }
  return os.str();
}

void write_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    f.flush();
    if (!f) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename output into place: " + ec.message());
  }
}

}  // namespace mghmc
