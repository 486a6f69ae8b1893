#include "mghmc/geometry.hpp"

#include "mghmc/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace mghmc {

MassMatrix MassMatrix::identity(Eigen::Index d) { return MassMatrix(Matrix::Identity(d, d)); }

MassMatrix::MassMatrix(Matrix m) : mass_(std::move(m)) {
  if (mass_.rows() == 0 || mass_.rows() != mass_.cols()) {
    throw InvalidParams("mass matrix must be square and non-empty");
  }
  if (!mass_.allFinite()) throw InvalidParams("mass matrix has non-finite entries");
  const double scale = mass_.cwiseAbs().maxCoeff();
  if ((mass_ - mass_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidParams("mass matrix is not symmetric");
  }
  const auto n = mass_.rows();
  identity_ = mass_.isIdentity(0.0);
  if (identity_) {
    inverse_ = sqrt_ = inverse_sqrt_ = eigenvectors_ = Matrix::Identity(n, n);
    eigenvalues_ = Vector::Ones(n);
    return;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (mass_ + mass_.transpose()));
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0) {
    throw InvalidParams("mass matrix is not positive definite");
  }
  eigenvectors_ = eig.eigenvectors();
  eigenvalues_ = eig.eigenvalues();
  const Matrix& u = eigenvectors_;
  inverse_ = u * eigenvalues_.cwiseInverse().asDiagonal() * u.transpose();
  sqrt_ = u * eigenvalues_.cwiseSqrt().asDiagonal() * u.transpose();
  inverse_sqrt_ = u * eigenvalues_.cwiseSqrt().cwiseInverse().asDiagonal() * u.transpose();
}

Vector MassMatrix::apply_inverse(const Vector& v) const {
  if (identity_) return v;
  return inverse_ * v;
}

Matrix MassMatrix::apply_inverse(const Matrix& v) const {
  if (identity_) return v;
  return inverse_ * v;
}

Vector MassMatrix::apply_sqrt(const Vector& v) const {
  if (identity_) return v;
  return sqrt_ * v;
}

Matrix MassMatrix::ou_resolvent(double c) const {
  const Vector diag = (1.0 + c * eigenvalues_.cwiseInverse().array()).cwiseInverse().matrix();
  return eigenvectors_ * diag.asDiagonal() * eigenvectors_.transpose();
}

Matrix MassMatrix::ou_explicit(double c) const {
  const Vector diag = (1.0 - c * eigenvalues_.cwiseInverse().array()).matrix();
  return eigenvectors_ * diag.asDiagonal() * eigenvectors_.transpose();
}

double MassMatrix::kinetic_energy(const Vector& p) const {
  if (identity_) return 0.5 * p.squaredNorm();
  return 0.5 * p.dot(inverse_ * p);
}

double condition_estimate(const Matrix& a) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (!a.allFinite()) return inf;
  if (a.size() == 1) return a(0, 0) != 0.0 ? 1.0 : inf;
  Eigen::JacobiSVD<Matrix> svd(a);
  const auto& s = svd.singularValues();
  const double smin = s.minCoeff();
  if (smin <= 0.0) return inf;
  return s.maxCoeff() / smin;
}

GramMatrix gram(const Matrix& jacobian_a, const Matrix& jacobian_b, const MassMatrix& mass) {
  GramMatrix g;
  g.value = jacobian_a.transpose() * mass.apply_inverse(jacobian_b);
  g.condition_estimate = condition_estimate(g.value);
  return g;
}

GramMatrix gram(const ConstraintModel& model, const Vector& q, const Vector& q2) {
  return gram(model.constraint_jacobian(q), model.constraint_jacobian(q2), model.mass());
}

Vector solve_gram(const GramMatrix& g, const Vector& rhs, double condition_limit) {
  if (!g.invertible(condition_limit)) {
    std::ostringstream os;
    os << "Gram matrix is numerically singular (condition estimate " << g.condition_estimate
       << ", limit " << condition_limit << ")";
    throw SingularGram(os.str());
  }
  if (g.value.size() == 1) return rhs / g.value(0, 0);
  return g.value.partialPivLu().solve(rhs);
}

Vector momentum_lagrange_rattle(const Matrix& jacobian, const MassMatrix& mass, const Vector& p,
                                double condition_limit) {
  const Matrix minv_j = mass.apply_inverse(jacobian);
  GramMatrix s;
  s.value = jacobian.transpose() * minv_j;
  s.condition_estimate = condition_estimate(s.value);
  const Vector b = minv_j.transpose() * p;
  return -solve_gram(s, b, condition_limit);
}

Vector momentum_lagrange_rattle(const ConstraintModel& model, const Vector& q, const Vector& p,
                                double condition_limit) {
  return momentum_lagrange_rattle(model.constraint_jacobian(q), model.mass(), p, condition_limit);
}

Vector cotangent_project(const Matrix& jacobian, const MassMatrix& mass, const Vector& v,
                         double condition_limit) {
  return v + jacobian * momentum_lagrange_rattle(jacobian, mass, v, condition_limit);
}

Vector cotangent_project(const ConstraintModel& model, const Vector& q, const Vector& v,
                         double condition_limit) {
  return cotangent_project(model.constraint_jacobian(q), model.mass(), v, condition_limit);
}

Vector momentum_lagrange_ou(const Matrix& jacobian, const MassMatrix& mass, const Vector& p,
                            double friction, double dt, double condition_limit) {
  const double c = dt * friction / 4.0;
  if (c == 0.0) return momentum_lagrange_rattle(jacobian, mass, p, condition_limit);
  GramMatrix s;
  s.value = jacobian.transpose() * mass.apply_inverse(Matrix(mass.ou_resolvent(c) * jacobian));
  s.condition_estimate = condition_estimate(s.value);
  const Vector b = jacobian.transpose() * mass.apply_inverse(p);
  return -solve_gram(s, b, condition_limit);
}

Vector momentum_lagrange_ou(const ConstraintModel& model, const Vector& q, const Vector& p,
                            double friction, double dt, double condition_limit) {
  return momentum_lagrange_ou(model.constraint_jacobian(q), model.mass(), p, friction, dt,
                              condition_limit);
}

ConstraintResiduals constraint_residuals(const ConstraintModel& model, const PhasePoint& x) {
  const Matrix j = model.constraint_jacobian(x.q);
  return {model.constraint(x.q).norm(), (j.transpose() * model.mass().apply_inverse(x.p)).norm()};
}

bool on_cotangent_bundle(const ConstraintModel& model, const PhasePoint& x, double tolerance) {
  const auto r = constraint_residuals(model, x);
  return r.position <= tolerance && r.momentum <= tolerance;
}

}  // namespace mghmc
