#pragma once

#include "mghmc/geometry.hpp"

#include <functional>
#include <memory>
#include <string>
#include <string_view>

namespace mghmc {

/// A constraint map xi: R^d -> R^m (m < d) with its Jacobian, a potential V
/// with its gradient, and a mass tensor. The zero level set of xi is the
/// manifold being sampled; V and M define the target measure on it.
///
/// Implementations must be immutable after construction: every method is
/// called concurrently from independent chains.
class ConstraintModel {
 public:
  explicit ConstraintModel(MassMatrix mass) : mass_(std::move(mass)) {}
  virtual ~ConstraintModel() = default;

  virtual std::string_view name() const = 0;
  virtual Eigen::Index constraint_dim() const = 0;
  Eigen::Index dim() const { return mass_.dim(); }

  virtual Vector constraint(const Vector& q) const = 0;
  /// d x m matrix whose columns are the gradients of the components of xi.
  virtual Matrix constraint_jacobian(const Vector& q) const = 0;
  virtual double potential(const Vector& q) const = 0;
  virtual Vector potential_gradient(const Vector& q) const = 0;

  const MassMatrix& mass() const { return mass_; }

  double hamiltonian(const PhasePoint& x) const {
    return potential(x.q) + mass_.kinetic_energy(x.p);
  }

 private:
  MassMatrix mass_;
};

using ModelPtr = std::shared_ptr<const ConstraintModel>;

/// ConstraintModel assembled from callables. Used for user models coming
/// from Python and for ad-hoc geometries in tests.
class FunctionModel final : public ConstraintModel {
 public:
  struct Functions {
    std::function<Vector(const Vector&)> constraint;
    std::function<Matrix(const Vector&)> constraint_jacobian;
    std::function<double(const Vector&)> potential;
    std::function<Vector(const Vector&)> potential_gradient;
  };

  FunctionModel(std::string name, Eigen::Index constraint_dim, MassMatrix mass, Functions fns);

  std::string_view name() const override { return name_; }
  Eigen::Index constraint_dim() const override { return constraint_dim_; }
  Vector constraint(const Vector& q) const override { return fns_.constraint(q); }
  Matrix constraint_jacobian(const Vector& q) const override { return fns_.constraint_jacobian(q); }
  double potential(const Vector& q) const override;
  Vector potential_gradient(const Vector& q) const override;

 private:
  std::string name_;
  Eigen::Index constraint_dim_;
  Functions fns_;
};

/// Central differences with step h. Test and model-validation use only.
Matrix finite_difference_jacobian(const ConstraintModel& model, const Vector& q, double h = 1e-6);
Vector finite_difference_gradient(const ConstraintModel& model, const Vector& q, double h = 1e-6);

}  // namespace mghmc
