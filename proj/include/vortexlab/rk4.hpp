#ifndef VORTEXLAB_RK4_HPP
#define VORTEXLAB_RK4_HPP

#include <cstddef>

#include "vortexlab/core.hpp"

namespace vortexlab {

/// One classical fourth-order Runge-Kutta step for dY/dt = rhs(Y) on a list
/// of points. `stage_check(Y)` runs on every stage state before the rhs is
/// evaluated (collision floors hook in here). The point-vortex and particle
/// solvers both go through this routine so that they agree bitwise on data
/// where their right-hand sides coincide.
template <typename Scalar, typename Rhs, typename StageCheck>
Vec2List<Scalar> rk4_step(const Vec2List<Scalar>& y, Scalar dt, Rhs&& rhs, StageCheck&& stage_check) {
  const std::size_t n = y.size();
  const Scalar half = dt / Scalar(2);
  const Scalar sixth = dt / Scalar(6);

  stage_check(y);
  const Vec2List<Scalar> k1 = rhs(y);
  Vec2List<Scalar> stage(n);
  for (std::size_t i = 0; i < n; ++i) stage[i] = y[i] + half * k1[i];
  stage_check(stage);
  const Vec2List<Scalar> k2 = rhs(stage);
  for (std::size_t i = 0; i < n; ++i) stage[i] = y[i] + half * k2[i];
  stage_check(stage);
  const Vec2List<Scalar> k3 = rhs(stage);
  for (std::size_t i = 0; i < n; ++i) stage[i] = y[i] + dt * k3[i];
  stage_check(stage);
  const Vec2List<Scalar> k4 = rhs(stage);

  Vec2List<Scalar> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = y[i] + sixth * (k1[i] + Scalar(2) * k2[i] + Scalar(2) * k3[i] + k4[i]);
  return out;
}

template <typename Scalar, typename Rhs>
Vec2List<Scalar> rk4_step(const Vec2List<Scalar>& y, Scalar dt, Rhs&& rhs) {
  return rk4_step<Scalar>(y, dt, rhs, [](const Vec2List<Scalar>&) {});
}

}  // namespace vortexlab

#endif  // VORTEXLAB_RK4_HPP
