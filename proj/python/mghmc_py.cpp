#include "mghmc/cli.hpp"
#include "mghmc/experiments.hpp"
#include "mghmc/models.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace mghmc;

namespace {

ReverseCheck reverse_check_arg(const std::string& s) { return parse_reverse_check(s); }

NewtonCriterion criterion_arg(const std::string& s) {
  if (s == "position") return NewtonCriterion::PositionIncrement;
  if (s == "increment") return NewtonCriterion::IncrementAndResidual;
  throw InvalidParams("newton criterion must be 'position' or 'increment'");
}

std::string_view criterion_name(NewtonCriterion c) {
  return c == NewtonCriterion::PositionIncrement ? "position" : "increment";
}

py::dict tally_dict(const RejectionTally& t) {
  py::dict d;
  d["attempts"] = t.attempts();
  for (auto o : {StepOutcome::Accepted, StepOutcome::NewtonForward, StepOutcome::NewtonReverse,
                 StepOutcome::NonReversible, StepOutcome::Metropolis}) {
    d[py::str(std::string(to_string(o)))] = t.count(o);
  }
  return d;
}

py::dict step_dict(const RattleStepResult& r) {
  py::dict d;
  d["classification"] = std::string(to_string(r.classification));
  d["proposed"] = r.proposed();
  if (r.forward_point) {
    d["q"] = r.forward_point->q;
    d["p"] = r.forward_point->p;
  } else {
    d["q"] = py::none();
    d["p"] = py::none();
  }
  d["half_multiplier"] = r.half_multiplier ? py::cast(*r.half_multiplier) : py::none();
  d["reverse_position"] = r.reverse_position ? py::cast(*r.reverse_position) : py::none();
  return d;
}

RattleConfig rattle_config(double dt, const std::string& reverse_check, bool use_forces,
                           double reverse_tolerance, const std::string& criterion) {
  RattleConfig cfg;
  cfg.dt = dt;
  cfg.reverse_check = reverse_check_arg(reverse_check);
  cfg.use_forces = use_forces;
  cfg.reverse_tolerance = reverse_tolerance;
  cfg.newton.criterion = criterion_arg(criterion);
  cfg.validate();
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Constrained HMC / GHMC on embedded manifolds";

  py::register_exception<InvalidParams>(m, "InvalidParams", PyExc_ValueError);
  py::register_exception<OffManifold>(m, "OffManifold", PyExc_ValueError);
  py::register_exception<SingularGram>(m, "SingularGram", PyExc_ArithmeticError);

  py::class_<ConstraintModel, std::shared_ptr<ConstraintModel>>(m, "Model")
      .def_property_readonly("name", &ConstraintModel::name)
      .def_property_readonly("dim", &ConstraintModel::dim)
      .def_property_readonly("constraint_dim", &ConstraintModel::constraint_dim)
      .def("constraint", &ConstraintModel::constraint, py::arg("q"))
      .def("constraint_jacobian", &ConstraintModel::constraint_jacobian, py::arg("q"))
      .def("potential", &ConstraintModel::potential, py::arg("q"))
      .def("potential_gradient", &ConstraintModel::potential_gradient, py::arg("q"))
      .def(
          "hamiltonian",
          [](const ConstraintModel& model, const Vector& q, const Vector& p) {
            return model.hamiltonian(PhasePoint{q, p});
          },
          py::arg("q"), py::arg("p"))
      .def(
          "project_momentum",
          [](const ConstraintModel& model, const Vector& q, const Vector& p) {
            return cotangent_project(model, q, p);
          },
          py::arg("q"), py::arg("p"));

  m.def(
      "make_model",
      [](const std::string& name, double major_radius, double minor_radius, std::optional<double> stiffness) {
        ModelOptions opts;
        opts.major_radius = major_radius;
        opts.minor_radius = minor_radius;
        opts.stiffness = stiffness;
        return std::const_pointer_cast<ConstraintModel>(make_model(name, opts));
      },
      py::arg("name"), py::arg("major_radius") = 1.0, py::arg("minor_radius") = 0.5,
      py::arg("stiffness") = py::none());

  m.def("model_names", [] {
    std::vector<std::string> out;
    for (auto n : model_names()) out.emplace_back(n);
    return out;
  });

  m.def(
      "torus_phi_density",
      [](double phi, double major_radius, double minor_radius) {
        TorusParams p;
        p.major_radius = major_radius;
        p.minor_radius = minor_radius;
        return torus_phi_density(phi, p);
      },
      py::arg("phi"), py::arg("major_radius") = 1.0, py::arg("minor_radius") = 0.5);

  py::class_<PhasePoint>(m, "PhasePoint")
      .def(py::init([](const Vector& q, const Vector& p) { return PhasePoint{q, p}; }), py::arg("q"),
           py::arg("p"))
      .def_readwrite("q", &PhasePoint::q)
      .def_readwrite("p", &PhasePoint::p);

  py::class_<RattleConfig>(m, "RattleConfig")
      .def(py::init(&rattle_config), py::arg("dt") = 0.1, py::arg("reverse_check") = "full",
           py::arg("use_forces") = true, py::arg("reverse_tolerance") = 1e-12,
           py::arg("newton_criterion") = "position")
      .def_readwrite("dt", &RattleConfig::dt)
      .def_readwrite("use_forces", &RattleConfig::use_forces)
      .def_readwrite("reverse_tolerance", &RattleConfig::reverse_tolerance);

  m.def(
      "rattle_step",
      [](const ConstraintModel& model, const Vector& q, const Vector& p, const RattleConfig& cfg) {
        py::dict d;
        const auto step = rattle_one_step(model, PhasePoint{q, p}, cfg);
        d["ok"] = step.ok();
        d["projection"] = std::string(to_string(step.projection.status));
        d["iterations"] = step.projection.iterations;
        d["multiplier"] = step.projection.multiplier;
        d["q"] = step.ok() ? py::cast(step.point->q) : py::none();
        d["p"] = step.ok() ? py::cast(step.point->p) : py::none();
        return d;
      },
      py::arg("model"), py::arg("q"), py::arg("p"), py::arg("config"),
      "One RATTLE step; returns the reversed-momentum end point (q1, -p1).");

  m.def(
      "psi_rev",
      [](const ConstraintModel& model, const Vector& q, const Vector& p, const RattleConfig& cfg) {
        return step_dict(psi_rev(model, PhasePoint{q, p}, cfg));
      },
      py::arg("model"), py::arg("q"), py::arg("p"), py::arg("config"));

  m.def(
      "psi_rev_k",
      [](const ConstraintModel& model, const Vector& q, const Vector& p, const RattleConfig& cfg, int steps) {
        return step_dict(psi_rev_k(model, PhasePoint{q, p}, cfg, steps));
      },
      py::arg("model"), py::arg("q"), py::arg("p"), py::arg("config"), py::arg("steps"));

  m.def(
      "newton_project",
      [](const ConstraintModel& model, const Vector& q, const Vector& q_free, int max_iterations,
         double tolerance, const std::string& criterion) {
        NewtonConfig cfg;
        cfg.max_iterations = max_iterations;
        cfg.tolerance = tolerance;
        cfg.criterion = criterion_arg(criterion);
        cfg.validate();
        const auto out = newton_project(model, q, q_free, cfg);
        py::dict d;
        d["status"] = std::string(to_string(out.status));
        d["multiplier"] = out.multiplier;
        d["iterations"] = out.iterations;
        d["residual"] = out.residual;
        return d;
      },
      py::arg("model"), py::arg("q"), py::arg("q_free"), py::arg("max_iterations") = 100,
      py::arg("tolerance") = 1e-12, py::arg("criterion") = "increment");

  m.def("circle_multiplier", &CircleModel::rattle_multiplier, py::arg("momentum_norm"), py::arg("dt"),
        "Closed-form RATTLE multiplier on the unit circle, or None when no real root exists.");

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_property(
          "experiment", [](const ExperimentConfig& c) { return std::string(to_string(c.experiment)); },
          [](ExperimentConfig& c, const std::string& s) {
            if (s == "histogram") c.experiment = ExperimentKind::Histogram;
            else if (s == "rejection-table") c.experiment = ExperimentKind::RejectionTable;
            else if (s == "residence-sweep") c.experiment = ExperimentKind::ResidenceSweep;
            else if (s == "trajectory") c.experiment = ExperimentKind::Trajectory;
            else throw InvalidParams("unknown experiment '" + s + "'");
          })
      .def_readwrite("model", &ExperimentConfig::model)
      .def_property(
          "stiffness", [](const ExperimentConfig& c) { return c.model_options.stiffness; },
          [](ExperimentConfig& c, std::optional<double> k) { c.model_options.stiffness = k; })
      .def_property(
          "schemes",
          [](const ExperimentConfig& c) {
            std::vector<std::string> out;
            for (const auto& s : c.schemes) out.push_back(s.label);
            return out;
          },
          [](ExperimentConfig& c, const std::vector<std::string>& names) {
            c.schemes.clear();
            for (const auto& n : names) c.schemes.push_back(parse_scheme(n));
          })
      .def_readwrite("dt", &ExperimentConfig::dt)
      .def_readwrite("alpha", &ExperimentConfig::alpha)
      .def_readwrite("gamma", &ExperimentConfig::friction)
      .def_readwrite("k_steps", &ExperimentConfig::rattle_steps)
      .def_readwrite("momentum_cap", &ExperimentConfig::momentum_cap)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_property(
          "reverse_check", [](const ExperimentConfig& c) { return std::string(to_string(c.reverse_check)); },
          [](ExperimentConfig& c, const std::string& s) { c.reverse_check = reverse_check_arg(s); })
      .def_property(
          "newton_criterion", [](const ExperimentConfig& c) { return std::string(criterion_name(c.newton.criterion)); },
          [](ExperimentConfig& c, const std::string& s) { c.newton.criterion = criterion_arg(s); })
      .def_readwrite("n_iter", &ExperimentConfig::n_iter)
      .def_readwrite("burn_in", &ExperimentConfig::burn_in)
      .def_readwrite("n_bins", &ExperimentConfig::n_bins)
      .def_readwrite("batch_length", &ExperimentConfig::batch_length)
      .def_readwrite("sweep", &ExperimentConfig::sweep)
      .def_readwrite("alphas", &ExperimentConfig::alphas)
      .def_readwrite("max_trajectory_points", &ExperimentConfig::max_trajectory_points)
      .def_readwrite("threads", &ExperimentConfig::threads)
      .def_property(
          "format", [](const ExperimentConfig& c) { return c.format == OutputFormat::CSV ? "csv" : "json"; },
          [](ExperimentConfig& c, const std::string& s) {
            if (s == "csv") c.format = OutputFormat::CSV;
            else if (s == "json") c.format = OutputFormat::JSON;
            else throw InvalidParams("format must be 'csv' or 'json'");
          })
      .def("validate", &ExperimentConfig::validate);

  // Experiment runners return the serialized output plus a few summary
  // numbers; the GIL is released while the chains run.
  m.def("run_histogram", [](const ExperimentConfig& cfg) {
    cfg.validate();
    HistogramResult r;
    {
      py::gil_scoped_release release;
      r = run_histogram(cfg);
    }
    py::dict d;
    d["text"] = format_histogram(cfg, r);
    d["samples"] = r.samples;
    std::vector<double> density;
    for (const auto& b : r.bins) density.push_back(b.density);
    d["density"] = density;
    d["tally"] = tally_dict(r.tally);
    if (r.chi_square) {
      d["chi2"] = r.chi_square->statistic;
      d["chi2_corrected"] = r.chi_square->corrected_statistic;
      d["p_value"] = r.chi_square->p_value;
    }
    d["critical_0.01"] = r.critical_value_01;
    return d;
  });

  m.def("run_rejection_table", [](const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<RejectionRow> rows;
    {
      py::gil_scoped_release release;
      rows = run_rejection_table(cfg);
    }
    py::list out;
    for (const auto& r : rows) {
      py::dict d;
      d["scheme"] = r.label;
      d["dt"] = r.dt;
      d["alpha"] = r.alpha;
      d["total"] = r.total();
      d["tally"] = tally_dict(r.tally);
      out.append(d);
    }
    py::dict d;
    d["text"] = format_rejection_table(cfg, rows);
    d["rows"] = out;
    return d;
  });

  m.def("run_residence_sweep", [](const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<ResidenceEstimate> rows;
    {
      py::gil_scoped_release release;
      rows = run_residence_sweep(cfg);
    }
    py::list out;
    for (const auto& e : rows) {
      py::dict d;
      d["scheme"] = e.label;
      d["dt"] = e.dt;
      d["switches"] = e.switches;
      d["mean_residence"] = e.mean_residence;
      d["nonrev_rejection_rate"] = e.nonrev_rejection_rate;
      out.append(d);
    }
    py::dict d;
    d["text"] = format_residence(cfg, rows);
    d["rows"] = out;
    return d;
  });

  m.def("run_trajectory", [](const ExperimentConfig& cfg) {
    cfg.validate();
    TrajectoryResult r;
    {
      py::gil_scoped_release release;
      r = run_trajectory(cfg);
    }
    const Eigen::Index n = static_cast<Eigen::Index>(r.points.size());
    const Eigen::Index d = n ? r.points.front().q.size() : 0;
    Matrix q(n, d), p(n, d);
    std::vector<std::uint64_t> steps;
    for (Eigen::Index i = 0; i < n; ++i) {
      q.row(i) = r.points[static_cast<std::size_t>(i)].q.transpose();
      p.row(i) = r.points[static_cast<std::size_t>(i)].p.transpose();
      steps.push_back(r.points[static_cast<std::size_t>(i)].step);
    }
    py::dict out;
    out["text"] = format_trajectory(cfg, r);
    out["step"] = steps;
    out["q"] = q;
    out["p"] = p;
    out["thinning"] = r.thinning;
    out["tally"] = tally_dict(r.tally);
    return out;
  });

  m.def(
      "cli_main",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = cli_main(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line driver; returns (exit_code, stdout, stderr).");
}
