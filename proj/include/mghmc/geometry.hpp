#pragma once

// Linear-algebra kernel for constrained phase space: mass tensor, Gram
// matrices of the constraint Jacobian, and the momentum projections used by
// both the RATTLE and the Ornstein-Uhlenbeck stages.

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace mghmc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Default tolerance used when checking that a phase point lies on T*M.
inline constexpr double kConstraintTolerance = 1e-10;
/// Gram matrices whose condition estimate reaches this value are treated as
/// numerically singular.
inline constexpr double kDefaultConditionLimit = 1e12;

class SingularGram : public std::runtime_error {
 public:
  explicit SingularGram(const std::string& what) : std::runtime_error(what) {}
};

class InvalidParams : public std::invalid_argument {
 public:
  explicit InvalidParams(const std::string& what) : std::invalid_argument(what) {}
};

/// Symmetric positive definite mass tensor with the factors needed by the
/// samplers precomputed once.
class MassMatrix {
 public:
  /// Identity mass in dimension d.
  static MassMatrix identity(Eigen::Index d);

  /// Throws InvalidParams unless `m` is square, symmetric to 1e-12 relative
  /// and has strictly positive eigenvalues.
  explicit MassMatrix(Matrix m);

  Eigen::Index dim() const { return mass_.rows(); }
  bool is_identity() const { return identity_; }

  const Matrix& matrix() const { return mass_; }
  const Matrix& inverse() const { return inverse_; }
  const Matrix& sqrt() const { return sqrt_; }
  const Matrix& inverse_sqrt() const { return inverse_sqrt_; }

  Vector apply_inverse(const Vector& v) const;
  Matrix apply_inverse(const Matrix& v) const;
  Vector apply_sqrt(const Vector& v) const;

  /// (Id + c M^{-1})^{-1}, the resolvent of the mid-point OU update.
  Matrix ou_resolvent(double c) const;
  /// (Id - c M^{-1}), the explicit half of the mid-point OU update.
  Matrix ou_explicit(double c) const;

  /// p^T M^{-1} p / 2.
  double kinetic_energy(const Vector& p) const;

 private:
  Matrix mass_;
  Matrix inverse_;
  Matrix sqrt_;
  Matrix inverse_sqrt_;
  Matrix eigenvectors_;
  Vector eigenvalues_;
  bool identity_ = false;
};

/// m x m matrix grad_xi(q)^T M^{-1} grad_xi(q2) together with the ratio of its
/// extreme singular values (+inf when singular or not finite).
struct GramMatrix {
  Matrix value;
  double condition_estimate = 0.0;

  bool invertible(double condition_limit = kDefaultConditionLimit) const {
    return condition_estimate < condition_limit;
  }
};

struct PhasePoint {
  Vector q;
  Vector p;
};

class ConstraintModel;

/// sigma_max / sigma_min, or +inf when the matrix is singular or has
/// non-finite entries.
double condition_estimate(const Matrix& a);

GramMatrix gram(const Matrix& jacobian_a, const Matrix& jacobian_b, const MassMatrix& mass);
GramMatrix gram(const ConstraintModel& model, const Vector& q, const Vector& q2);

/// Solves G x = rhs with partial-pivot LU. Throws SingularGram when the
/// condition estimate is at or above `condition_limit`.
Vector solve_gram(const GramMatrix& g, const Vector& rhs,
                  double condition_limit = kDefaultConditionLimit);

/// M^{-1}-orthogonal projection onto T*_q M:
/// v - grad_xi G_M^{-1} grad_xi^T M^{-1} v.
Vector cotangent_project(const Matrix& jacobian, const MassMatrix& mass, const Vector& v,
                         double condition_limit = kDefaultConditionLimit);
Vector cotangent_project(const ConstraintModel& model, const Vector& q, const Vector& v,
                         double condition_limit = kDefaultConditionLimit);

/// Multiplier lambda with grad_xi(q)^T M^{-1} (p + grad_xi(q) lambda) = 0.
Vector momentum_lagrange_rattle(const Matrix& jacobian, const MassMatrix& mass, const Vector& p,
                                double condition_limit = kDefaultConditionLimit);
Vector momentum_lagrange_rattle(const ConstraintModel& model, const Vector& q, const Vector& p,
                                double condition_limit = kDefaultConditionLimit);

/// Multiplier lambda with
/// grad_xi^T M^{-1} (p + (Id + dt*gamma*M^{-1}/4)^{-1} grad_xi lambda) = 0.
/// With gamma = 0 this is momentum_lagrange_rattle.
Vector momentum_lagrange_ou(const Matrix& jacobian, const MassMatrix& mass, const Vector& p,
                            double friction, double dt,
                            double condition_limit = kDefaultConditionLimit);
Vector momentum_lagrange_ou(const ConstraintModel& model, const Vector& q, const Vector& p,
                            double friction, double dt,
                            double condition_limit = kDefaultConditionLimit);

/// ||xi(q)|| and ||grad_xi(q)^T M^{-1} p||, the two phase-space residuals.
struct ConstraintResiduals {
  double position = 0.0;
  double momentum = 0.0;
};
ConstraintResiduals constraint_residuals(const ConstraintModel& model, const PhasePoint& x);
bool on_cotangent_bundle(const ConstraintModel& model, const PhasePoint& x,
                         double tolerance = kConstraintTolerance);

}  // namespace mghmc
