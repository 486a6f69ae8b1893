#include "mghmc/models.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace mghmc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a -= kTwoPi;
  return a;
}

}  // namespace

// FunctionModel ----------------------------------------------------------------

FunctionModel::FunctionModel(std::string name, Eigen::Index constraint_dim, MassMatrix mass,
                             Functions fns)
    : ConstraintModel(std::move(mass)),
      name_(std::move(name)),
      constraint_dim_(constraint_dim),
      fns_(std::move(fns)) {
  if (!fns_.constraint || !fns_.constraint_jacobian) {
    throw InvalidParams("a constraint model needs xi and its Jacobian");
  }
  if (constraint_dim_ < 1 || constraint_dim_ >= dim()) {
    throw InvalidParams("constraint dimension must satisfy 1 <= m < d");
  }
}

double FunctionModel::potential(const Vector& q) const {
  return fns_.potential ? fns_.potential(q) : 0.0;
}

Vector FunctionModel::potential_gradient(const Vector& q) const {
  return fns_.potential_gradient ? fns_.potential_gradient(q) : Vector::Zero(q.size());
}

Matrix finite_difference_jacobian(const ConstraintModel& model, const Vector& q, double h) {
  Matrix jac(q.size(), model.constraint_dim());
  Vector x = q;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    x[i] = q[i] + h;
    const Vector plus = model.constraint(x);
    x[i] = q[i] - h;
    const Vector minus = model.constraint(x);
    x[i] = q[i];
    jac.row(i) = ((plus - minus) / (2.0 * h)).transpose();
  }
  return jac;
}

Vector finite_difference_gradient(const ConstraintModel& model, const Vector& q, double h) {
  Vector g(q.size());
  Vector x = q;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    x[i] = q[i] + h;
    const double plus = model.potential(x);
    x[i] = q[i] - h;
    const double minus = model.potential(x);
    x[i] = q[i];
    g[i] = (plus - minus) / (2.0 * h);
  }
  return g;
}

GradientCheck check_gradients(const ConstraintModel& model, std::span<const Vector> points,
                              double h) {
  GradientCheck out;
  for (const Vector& q : points) {
    const Matrix ja = model.constraint_jacobian(q);
    const Matrix jf = finite_difference_jacobian(model, q, h);
    out.jacobian_error = std::max(out.jacobian_error, (ja - jf).norm() / std::max(1.0, ja.norm()));
    const Vector ga = model.potential_gradient(q);
    const Vector gf = finite_difference_gradient(model, q, h);
    out.potential_error = std::max(out.potential_error, (ga - gf).norm() / std::max(1.0, ga.norm()));
  }
  return out;
}

// Torus ------------------------------------------------------------------------

TorusModel::TorusModel(TorusParams params, std::string name)
    : ConstraintModel(MassMatrix::identity(3)), params_(params), name_(std::move(name)) {
  if (!(params_.minor_radius > 0.0) || !(params_.minor_radius < params_.major_radius)) {
    std::ostringstream os;
    os << "torus radii must satisfy 0 < r < R (got R=" << params_.major_radius
       << ", r=" << params_.minor_radius << ")";
    throw InvalidParams(os.str());
  }
}

Vector TorusModel::constraint(const Vector& q) const {
  const double rho = std::hypot(q[0], q[1]);
  const double a = params_.major_radius - rho;
  Vector xi(1);
  xi[0] = a * a + q[2] * q[2] - params_.minor_radius * params_.minor_radius;
  return xi;
}

Matrix TorusModel::constraint_jacobian(const Vector& q) const {
  Matrix j(3, 1);
  const double rho = std::hypot(q[0], q[1]);
  if (rho < kAxisExclusion) {
    j.setConstant(std::numeric_limits<double>::quiet_NaN());
    return j;
  }
  const double s = -2.0 * (params_.major_radius - rho) / rho;
  j(0, 0) = s * q[0];
  j(1, 0) = s * q[1];
  j(2, 0) = 2.0 * q[2];
  return j;
}

double TorusModel::potential(const Vector& q) const {
  const double k = params_.stiffness;
  switch (params_.potential) {
    case TorusPotential::Zero:
      return 0.0;
    case TorusPotential::Quadratic:
      return 0.5 * k * q.squaredNorm();
    case TorusPotential::DoubleWell: {
      const double w = q[0] * q[0] - params_.major_radius * params_.major_radius;
      return k * w * w;
    }
  }
  return 0.0;
}

Vector TorusModel::potential_gradient(const Vector& q) const {
  const double k = params_.stiffness;
  switch (params_.potential) {
    case TorusPotential::Zero:
      return Vector::Zero(3);
    case TorusPotential::Quadratic:
      return k * q;
    case TorusPotential::DoubleWell: {
      Vector g = Vector::Zero(3);
      g[0] = 4.0 * k * q[0] * (q[0] * q[0] - params_.major_radius * params_.major_radius);
      return g;
    }
  }
  return Vector::Zero(3);
}

Vector TorusModel::default_start() const {
  Vector q = Vector::Zero(3);
  q[0] = params_.major_radius + params_.minor_radius;
  return q;
}

Vector TorusModel::embed(double theta, double phi) const {
  const double w = params_.major_radius + params_.minor_radius * std::cos(phi);
  Vector q(3);
  q << w * std::cos(theta), w * std::sin(theta), params_.minor_radius * std::sin(phi);
  return q;
}

TorusAngles angle_coordinates(const Vector& q, const TorusParams& params) {
  const double rho = std::hypot(q[0], q[1]);
  const double a = params.major_radius - rho;
  const double xi = a * a + q[2] * q[2] - params.minor_radius * params.minor_radius;
  if (!(std::abs(xi) <= 10.0 * kConstraintTolerance)) {
    std::ostringstream os;
    os << "point is off the torus (|xi| = " << std::abs(xi) << ")";
    throw OffManifold(os.str());
  }
  return {wrap_angle(std::atan2(q[1], q[0])), wrap_angle(std::atan2(q[2], rho - params.major_radius))};
}

double torus_phi_density(double phi, const TorusParams& params) {
  return (1.0 + params.minor_radius / params.major_radius * std::cos(phi)) / kTwoPi;
}

double torus_phi_mass(double a, double b, const TorusParams& params) {
  return ((b - a) + params.minor_radius / params.major_radius * (std::sin(b) - std::sin(a))) / kTwoPi;
}

// Circle and sphere --------------------------------------------------------------

CircleModel::CircleModel() : ConstraintModel(MassMatrix::identity(2)) {}

Vector CircleModel::constraint(const Vector& q) const {
  Vector xi(1);
  xi[0] = q.squaredNorm() - 1.0;
  return xi;
}

Matrix CircleModel::constraint_jacobian(const Vector& q) const { return 2.0 * q; }

std::optional<double> CircleModel::rattle_multiplier(double momentum_norm, double dt) {
  const double disc = 1.0 - dt * dt * momentum_norm * momentum_norm;
  if (disc < 0.0) return std::nullopt;
  return (-1.0 + std::sqrt(disc)) / (2.0 * dt);
}

SphereModel::SphereModel() : ConstraintModel(MassMatrix::identity(3)) {}

Vector SphereModel::constraint(const Vector& q) const {
  Vector xi(1);
  xi[0] = q.squaredNorm() - 1.0;
  return xi;
}

Matrix SphereModel::constraint_jacobian(const Vector& q) const { return 2.0 * q; }

ModelPtr torus_model(const TorusParams& params) { return std::make_shared<TorusModel>(params); }
ModelPtr circle_model() { return std::make_shared<CircleModel>(); }
ModelPtr sphere_model() { return std::make_shared<SphereModel>(); }

// Registry -----------------------------------------------------------------------

namespace {

constexpr std::array<std::string_view, 5> kModelNames{
    "circle", "torus-zero", "torus-quadratic", "torus-doublewell", "sphere"};

}  // namespace

std::span<const std::string_view> model_names() { return kModelNames; }

std::optional<TorusParams> torus_params_for(std::string_view name, const ModelOptions& options) {
  TorusParams p;
  p.major_radius = options.major_radius;
  p.minor_radius = options.minor_radius;
  if (name == "torus-zero") {
    p.potential = TorusPotential::Zero;
    p.stiffness = options.stiffness.value_or(0.0);
  } else if (name == "torus-quadratic") {
    p.potential = TorusPotential::Quadratic;
    p.stiffness = options.stiffness.value_or(1.0);
  } else if (name == "torus-doublewell") {
    p.potential = TorusPotential::DoubleWell;
    p.stiffness = options.stiffness.value_or(5.0);
  } else {
    return std::nullopt;
  }
  return p;
}

ModelPtr make_model(std::string_view name, const ModelOptions& options) {
  if (auto tp = torus_params_for(name, options)) {
    return std::make_shared<TorusModel>(*tp, std::string(name));
  }
  if (name == "circle") return circle_model();
  if (name == "sphere") return sphere_model();
  std::ostringstream os;
  os << "unknown model '" << name << "' (expected one of:";
  for (auto n : kModelNames) os << ' ' << n;
  os << ')';
  throw InvalidParams(os.str());
}

}  // namespace mghmc
