#pragma once

#include "mghmc/models.hpp"
#include "mghmc/rng.hpp"

#include <cmath>
#include <numbers>

namespace mghmc::testing {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline Vector random_normal(Eigen::Index d, Rng& rng) {
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = rng.normal();
  return v;
}

/// Uniform angles on the torus surface, momentum projected onto T*_q M with
/// the given scale.
inline PhasePoint random_torus_point(const TorusModel& torus, Rng& rng, double momentum_scale = 1.0) {
  const Vector q = torus.embed(kTwoPi * rng.uniform(), kTwoPi * rng.uniform());
  const Vector p = cotangent_project(torus, q, momentum_scale * random_normal(3, rng));
  return {q, p};
}

inline std::shared_ptr<const TorusModel> as_torus(const ModelPtr& m) {
  return std::dynamic_pointer_cast<const TorusModel>(m);
}

}  // namespace mghmc::testing
