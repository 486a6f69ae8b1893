#include "doctest.h"

#include "mghmc/experiments.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace mghmc;

namespace {

ExperimentConfig small(ExperimentKind kind) {
  ExperimentConfig cfg;
  cfg.experiment = kind;
  cfg.n_iter = 4000;
  cfg.n_bins = 20;
  return cfg;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  for (std::string f; std::getline(is, f, ',');) out.push_back(f);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

TEST_CASE("scheme and reverse-check names") {
  const SchemeChoice mrw = parse_scheme("mrw");
  CHECK(mrw.scheme == Scheme::MALA);
  CHECK_FALSE(mrw.use_forces);
  CHECK(parse_scheme("ghmc-strang").scheme == Scheme::GHMC_Strang);
  CHECK(parse_scheme("hmc").use_forces);
  CHECK_THROWS_AS(parse_scheme("nuts"), InvalidParams);
  CHECK(parse_reverse_check("partial") == ReverseCheck::PartialNoPositionCheck);
  CHECK_THROWS_AS(parse_reverse_check("some"), InvalidParams);
}

TEST_CASE("sampler configuration from experiment settings") {
  ExperimentConfig cfg;
  const SchemeChoice lt = parse_scheme("ghmc-lt");
  CHECK(sampler_config(cfg, lt, 1.0).alpha == 0.5);
  CHECK(sampler_config(cfg, lt, 1.0).friction == doctest::Approx(std::log(2.0)));
  cfg.friction = std::log(2.0);
  CHECK(sampler_config(cfg, lt, 0.5).alpha == doctest::Approx(std::sqrt(0.5)));
  CHECK(sampler_config(cfg, lt, 0.5, 0.9).alpha == 0.9);
  cfg.friction.reset();
  cfg.alpha = 0.0;
  CHECK_THROWS_AS(sampler_config(cfg, parse_scheme("ghmc-strang"), 1.0), InvalidParams);
  cfg.momentum_cap = 4.0;
  CHECK_FALSE(sampler_config(cfg, lt, 1.0).momentum_cap);
  CHECK(sampler_config(cfg, parse_scheme("mala"), 1.0).momentum_cap == 4.0);
}

TEST_CASE("config validation") {
  ExperimentConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  auto fails = [](auto mutate) {
    ExperimentConfig c;
    mutate(c);
    CHECK_THROWS_AS(c.validate(), InvalidParams);
  };
  fails([](ExperimentConfig& c) { c.dt = -1; });
  fails([](ExperimentConfig& c) { c.n_bins = 1; });
  fails([](ExperimentConfig& c) { c.n_iter = 0; });
  fails([](ExperimentConfig& c) { c.alpha = 1.1; });
  fails([](ExperimentConfig& c) { c.sweep = {0.3, 0.1}; });
  fails([](ExperimentConfig& c) { c.sweep = {0.1, 0.1}; });
  fails([](ExperimentConfig& c) { c.model = "sphere"; });
  fails([](ExperimentConfig& c) { c.model = "moebius"; });
  fails([](ExperimentConfig& c) { c.experiment = ExperimentKind::ResidenceSweep; });
  fails([](ExperimentConfig& c) { c.momentum_cap = 2.0; });
  ExperimentConfig traj;
  traj.experiment = ExperimentKind::Trajectory;
  traj.model = "sphere";
  CHECK_NOTHROW(traj.validate());
}

TEST_CASE("histogram output") {
  ExperimentConfig cfg = small(ExperimentKind::Histogram);
  const HistogramResult r = run_histogram(cfg);
  CHECK(r.samples == cfg.n_iter);
  CHECK(r.tally.attempts() == cfg.n_iter);
  REQUIRE(r.bins.size() == 20);
  double integral = 0.0, reference = 0.0;
  for (const auto& b : r.bins) {
    integral += b.density * (b.phi_hi - b.phi_lo);
    REQUIRE(b.reference_density);
    reference += *b.reference_density * (b.phi_hi - b.phi_lo);
  }
  CHECK(std::abs(integral - 1.0) < 1e-9);
  CHECK(std::abs(reference - 1.0) < 1e-12);
  CHECK(r.bins.back().phi_hi == 2.0 * std::numbers::pi);
  REQUIRE(r.chi_square);
  CHECK(r.chi_square->degrees_of_freedom == 19.0);

  const auto text = lines(format_histogram(cfg, r));
  CHECK(text[0] == "# manifold-ghmc v1, experiment=histogram, seed=0");
  CHECK(text[1].rfind("# model=torus-zero, scheme=ghmc-lt, dt=1,", 0) == 0);
  const auto header = std::find(text.begin(), text.end(), "bin,phi_lo,phi_hi,count,density,reference_density");
  REQUIRE(header != text.end());
  CHECK(text.end() - header == 21);
  CHECK(fields(*(header + 1)).size() == 6);
}

TEST_CASE("histogram without an exact reference") {
  ExperimentConfig cfg = small(ExperimentKind::Histogram);
  cfg.model = "torus-quadratic";
  const HistogramResult r = run_histogram(cfg);
  CHECK_FALSE(r.chi_square);
  for (const auto& b : r.bins) CHECK_FALSE(b.reference_density);
  const auto text = lines(format_histogram(cfg, r));
  CHECK(fields(text.back()).back().empty());
}

TEST_CASE("histogram JSON") {
  ExperimentConfig cfg = small(ExperimentKind::Histogram);
  cfg.format = OutputFormat::JSON;
  const auto j = nlohmann::json::parse(format_histogram(cfg, run_histogram(cfg)));
  CHECK(j["format"] == "manifold-ghmc v1");
  CHECK(j["bins"].size() == 20);
  CHECK(j["summary"]["tally"]["attempts"] == 4000);
  CHECK(j["config"]["schemes"][0] == "ghmc-lt");
}

TEST_CASE("rejection table rows") {
  ExperimentConfig cfg = small(ExperimentKind::RejectionTable);
  cfg.model = "torus-quadratic";
  cfg.schemes = {parse_scheme("mrw"), parse_scheme("mala"), parse_scheme("ghmc-lt")};
  cfg.sweep = {0.3, 1.0};
  cfg.n_iter = 2000;
  const auto rows = run_rejection_table(cfg);
  // Per timestep: mrw, mala and three GHMC alpha rows.
  REQUIRE(rows.size() == 10);
  CHECK(rows[0].label == "mrw");
  CHECK(rows[2].alpha == 0.1);
  CHECK(rows[4].alpha == 0.9);
  CHECK(rows[5].dt == 1.0);
  for (const auto& r : rows) {
    double sum = 0.0;
    for (auto o : {StepOutcome::Accepted, StepOutcome::NewtonForward, StepOutcome::NewtonReverse,
                   StepOutcome::NonReversible, StepOutcome::Metropolis}) {
      CHECK(r.rate(o) >= 0.0);
      CHECK(r.rate(o) <= 1.0);
      sum += r.rate(o);
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    CHECK(r.total() == doctest::Approx(1.0 - r.rate(StepOutcome::Accepted)));
  }

  const auto text = lines(format_rejection_table(cfg, rows));
  CHECK(text[2] ==
        "scheme,dt,alpha,n_iter,total,total_se,newton_forward,newton_forward_se,newton_reverse,"
        "newton_reverse_se,non_reversibility,non_reversibility_se,metropolis,metropolis_se,accepted");
  CHECK(text.size() == 3 + rows.size());
  for (std::size_t i = 3; i < text.size(); ++i) CHECK(fields(text[i]).size() == 15);
}

TEST_CASE("results do not depend on the thread count") {
  ExperimentConfig cfg = small(ExperimentKind::RejectionTable);
  cfg.model = "torus-quadratic";
  cfg.schemes = {parse_scheme("mala"), parse_scheme("ghmc-lt")};
  cfg.n_iter = 1000;
  cfg.threads = 1;
  const std::string one = format_rejection_table(cfg, run_rejection_table(cfg));
  cfg.threads = 3;
  const std::string three = format_rejection_table(cfg, run_rejection_table(cfg));
  CHECK(one == three);
}

TEST_CASE("residence sweep") {
  ExperimentConfig cfg = small(ExperimentKind::ResidenceSweep);
  cfg.model = "torus-doublewell";
  cfg.schemes = {parse_scheme("mala"), parse_scheme("ghmc-lt")};
  cfg.friction = std::log(2.0);
  cfg.sweep = {0.01, 0.7};
  cfg.n_iter = 20000;
  const auto rows = run_residence_sweep(cfg);
  REQUIRE(rows.size() == 4);
  // At dt = 0.01 the chain cannot cross the barrier in 2e4 steps.
  CHECK(rows[0].switches == 0);
  CHECK_FALSE(rows[0].mean_residence);
  CHECK(rows[1].switches > 0);
  REQUIRE(rows[1].mean_residence);
  CHECK(*rows[1].mean_residence >= 1.0);
  CHECK(rows[3].alpha == doctest::Approx(std::exp(-std::log(2.0) * 0.7)));
  CHECK(rows[3].friction == doctest::Approx(std::log(2.0)));

  const auto text = lines(format_residence(cfg, rows));
  CHECK(text[2] ==
        "scheme,dt,alpha,gamma,n_iter,switches,mean_residence,nonrev_rejection_rate,total_rejection_rate,status");
  CHECK(fields(text[3]).back() == "no-switches");
  CHECK(fields(text[4]).back() == "ok");
}

TEST_CASE("trajectory thinning") {
  ExperimentConfig cfg = small(ExperimentKind::Trajectory);
  cfg.model = "sphere";
  cfg.n_iter = 1001;
  cfg.max_trajectory_points = 100;
  const TrajectoryResult r = run_trajectory(cfg);
  CHECK(r.thinning == 11);
  CHECK(r.points.size() <= 100);
  CHECK(r.points.size() == 91);
  CHECK(r.points.front().step == 11);
  for (const auto& p : r.points) CHECK(std::abs(p.q.norm() - 1.0) < 1e-10);
  const auto text = lines(format_trajectory(cfg, r));
  CHECK(text[3] == "step,q0,q1,q2,p0,p1,p2,outcome");
}

TEST_CASE("identical seeds give identical output") {
  ExperimentConfig cfg = small(ExperimentKind::Histogram);
  cfg.seed = 42;
  const std::string a = format_histogram(cfg, run_histogram(cfg));
  const std::string b = format_histogram(cfg, run_histogram(cfg));
  CHECK(a == b);
  cfg.seed = 43;
  CHECK(format_histogram(cfg, run_histogram(cfg)) != a);
}

TEST_CASE("atomic writes") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "mghmc_atomic_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path target = dir / "out.csv";
  write_atomic(target.string(), "first\n");
  write_atomic(target.string(), "second\n");
  std::ifstream f(target);
  std::string content((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  CHECK(content == "second\n");
  CHECK(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}) == 1);
  CHECK_THROWS(write_atomic((dir / "missing" / "x.csv").string(), "x"));
  fs::remove_all(dir);
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 6.02e23, -2.5e-300}) CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(-INFINITY) == "-inf");
}
