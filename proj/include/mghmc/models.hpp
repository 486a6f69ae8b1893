#pragma once

// Bundled constraint models: unit circle, the 3D torus of radii (R, r) with
// zero / quadratic / double-well potentials, and the unit sphere.

#include "mghmc/model.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mghmc {

class OffManifold : public std::domain_error {
 public:
  explicit OffManifold(const std::string& what) : std::domain_error(what) {}
};

enum class TorusPotential { Zero, Quadratic, DoubleWell };

struct TorusParams {
  double major_radius = 1.0;
  double minor_radius = 0.5;
  TorusPotential potential = TorusPotential::Zero;
  /// k in V = k|q|^2/2 (Quadratic) or V = k (x^2 - R^2)^2 (DoubleWell).
  double stiffness = 1.0;
};

/// xi(x, y, z) = (R - sqrt(x^2 + y^2))^2 + z^2 - r^2 with identity mass.
/// The Jacobian is not defined on the z axis; points with
/// sqrt(x^2 + y^2) < kAxisExclusion get a NaN Jacobian, which the Newton
/// solver reports as a singular system.
class TorusModel final : public ConstraintModel {
 public:
  static constexpr double kAxisExclusion = 1e-8;

  explicit TorusModel(TorusParams params, std::string name = "torus");

  std::string_view name() const override { return name_; }
  Eigen::Index constraint_dim() const override { return 1; }
  Vector constraint(const Vector& q) const override;
  Matrix constraint_jacobian(const Vector& q) const override;
  double potential(const Vector& q) const override;
  Vector potential_gradient(const Vector& q) const override;

  const TorusParams& params() const { return params_; }

  /// (R + r, 0, 0), the starting point of every torus experiment.
  Vector default_start() const;
  /// (x, y, z) = ((R + r cos phi) cos theta, (R + r cos phi) sin theta, r sin phi).
  Vector embed(double theta, double phi) const;

 private:
  TorusParams params_;
  std::string name_;
};

/// xi(q) = |q|^2 - 1 in the plane, V = 0, M = Id. RATTLE on this model has a
/// closed-form position multiplier.
class CircleModel final : public ConstraintModel {
 public:
  CircleModel();

  std::string_view name() const override { return "circle"; }
  Eigen::Index constraint_dim() const override { return 1; }
  Vector constraint(const Vector& q) const override;
  Matrix constraint_jacobian(const Vector& q) const override;
  double potential(const Vector&) const override { return 0.0; }
  Vector potential_gradient(const Vector& q) const override { return Vector::Zero(q.size()); }

  /// Position multiplier lambda^{1/2} of one RATTLE step from a point of the
  /// circle with tangent momentum of norm `momentum_norm`:
  /// (-1 + sqrt(1 - dt^2 |p|^2)) / (2 dt). Empty when dt^2 |p|^2 > 1.
  static std::optional<double> rattle_multiplier(double momentum_norm, double dt);
};

/// xi(q) = |q|^2 - 1 in R^3, V = 0, M = Id. Extra geometry for smoke tests;
/// not one of the reference experiments.
class SphereModel final : public ConstraintModel {
 public:
  SphereModel();

  std::string_view name() const override { return "sphere"; }
  Eigen::Index constraint_dim() const override { return 1; }
  Vector constraint(const Vector& q) const override;
  Matrix constraint_jacobian(const Vector& q) const override;
  double potential(const Vector&) const override { return 0.0; }
  Vector potential_gradient(const Vector& q) const override { return Vector::Zero(q.size()); }
};

ModelPtr torus_model(const TorusParams& params);
ModelPtr circle_model();
ModelPtr sphere_model();

/// Angles (theta, phi) in [0, 2 pi)^2 of a point on the torus.
/// Throws OffManifold when |xi(q)| > 10 * kConstraintTolerance.
struct TorusAngles {
  double theta = 0.0;
  double phi = 0.0;
};
TorusAngles angle_coordinates(const Vector& q, const TorusParams& params);

/// Stationary density of phi on the torus when V = 0:
/// (1 + (r/R) cos phi) / (2 pi).
double torus_phi_density(double phi, const TorusParams& params);
/// Integral of torus_phi_density over [a, b].
double torus_phi_mass(double a, double b, const TorusParams& params);

// Registry -------------------------------------------------------------------

/// Names accepted by make_model: "circle", "torus-zero", "torus-quadratic",
/// "torus-doublewell", "sphere".
std::span<const std::string_view> model_names();

struct ModelOptions {
  double major_radius = 1.0;
  double minor_radius = 0.5;
  /// Stiffness override; the defaults are k = 1 (quadratic) and k = 5
  /// (double well).
  std::optional<double> stiffness;
};

/// Throws InvalidParams for unknown names or invalid torus radii.
ModelPtr make_model(std::string_view name, const ModelOptions& options = {});

/// Torus parameters of a registry torus, or empty for non-torus names.
std::optional<TorusParams> torus_params_for(std::string_view name, const ModelOptions& options = {});

/// Largest relative deviation between analytic and central-difference
/// derivatives (Jacobian of xi and gradient of V) over the given points.
struct GradientCheck {
  double jacobian_error = 0.0;
  double potential_error = 0.0;
};
GradientCheck check_gradients(const ConstraintModel& model, std::span<const Vector> points,
                              double h = 1e-6);

}  // namespace mghmc
