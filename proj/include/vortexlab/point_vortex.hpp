#ifndef VORTEXLAB_POINT_VORTEX_HPP
#define VORTEXLAB_POINT_VORTEX_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "vortexlab/core.hpp"
#include "vortexlab/kernel.hpp"
#include "vortexlab/rk4.hpp"

namespace vortexlab {

/// Helmholtz-Kirchhoff point vortices: positions Y_i, intensities a_i, time t.
template <typename Scalar>
struct PointVortexState {
  Vec2List<Scalar> positions;
  std::vector<Scalar> intensities;
  Scalar t = Scalar(0);

  [[nodiscard]] std::size_t size() const { return positions.size(); }

  void validate() const {
    if (positions.empty()) throw ValidationError("vortices", "at least one vortex is required");
    if (positions.size() != intensities.size())
      throw ValidationError("vortices", "positions and intensities differ in length");
    for (std::size_t i = 0; i < size(); ++i) {
      if (!std::isfinite(positions[i].x()) || !std::isfinite(positions[i].y()))
        throw ValidationError("vortices", "non-finite position");
      if (!(intensities[i] != Scalar(0)) || !std::isfinite(intensities[i]))
        throw ValidationError("intensity", "intensities must be finite and nonzero");
      for (std::size_t j = 0; j < i; ++j)
        if (positions[i] == positions[j])
          throw ValidationError("vortices", "positions must be pairwise distinct");
    }
  }
};

/// dY_i/dt = sum_{j != i} a_j K(Y_i - Y_j), summed in j order with pairwise
/// summation (the same path the particle solver takes in deterministic mode).
template <typename Scalar>
Vec2List<Scalar> pv_rhs(std::span<const Vec2<Scalar>> positions, std::span<const Scalar> intensities) {
  Vec2List<Scalar> out(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i)
    out[i] = detail::direct_sum_one<Scalar>(positions, intensities, positions[i], Scalar(0), true, i);
  return out;
}

template <typename Scalar>
Vec2List<Scalar> pv_rhs(const PointVortexState<Scalar>& state) {
  return pv_rhs<Scalar>(std::span<const Vec2<Scalar>>(state.positions),
                        std::span<const Scalar>(state.intensities));
}

/// Minimum pairwise distance, with the indices attaining it. +inf for N < 2.
template <typename Scalar>
std::pair<Scalar, std::pair<std::size_t, std::size_t>> closest_pair(std::span<const Vec2<Scalar>> positions) {
  Scalar best = std::numeric_limits<Scalar>::infinity();
  std::pair<std::size_t, std::size_t> where{0, 0};
  for (std::size_t i = 0; i < positions.size(); ++i)
    for (std::size_t j = i + 1; j < positions.size(); ++j) {
      const Scalar d = distance<Scalar>(positions[i], positions[j]);
      if (d < best) {
        best = d;
        where = {i, j};
      }
    }
  return {best, where};
}

template <typename Scalar>
Scalar pv_min_separation(const PointVortexState<Scalar>& state) {
  return closest_pair<Scalar>(std::span<const Vec2<Scalar>>(state.positions)).first;
}

/// H = -(1/2pi) sum_{i<j} a_i a_j log|Y_i - Y_j|.
template <typename Scalar>
Scalar pv_hamiltonian(const PointVortexState<Scalar>& state) {
  Scalar h = Scalar(0);
  for (std::size_t i = 0; i < state.size(); ++i)
    for (std::size_t j = i + 1; j < state.size(); ++j)
      h += state.intensities[i] * state.intensities[j] *
           newtonian_potential<Scalar>(state.positions[i] - state.positions[j]);
  return h;
}

template <typename Scalar>
struct Impulses {
  Vec2<Scalar> linear = Vec2<Scalar>::Zero();  ///< sum a_i Y_i
  Scalar angular = Scalar(0);                  ///< sum a_i |Y_i|^2
};

template <typename Scalar>
Impulses<Scalar> pv_impulses(const PointVortexState<Scalar>& state) {
  Impulses<Scalar> out;
  for (std::size_t i = 0; i < state.size(); ++i) {
    out.linear += state.intensities[i] * state.positions[i];
    out.angular += state.intensities[i] * state.positions[i].squaredNorm();
  }
  return out;
}

/// One RK4 step. Any stage state with a pair closer than `collision_floor`
/// (or coincident) raises CollisionError.
template <typename Scalar>
PointVortexState<Scalar> pv_step(const PointVortexState<Scalar>& state, Scalar dt,
                                 Scalar collision_floor = Scalar(0)) {
  if (!(dt > Scalar(0))) throw ValidationError("dt", "must be positive");
  const std::span<const Scalar> a(state.intensities);
  auto rhs = [&](const Vec2List<Scalar>& y) {
    try {
      return pv_rhs<Scalar>(std::span<const Vec2<Scalar>>(y), a);
    } catch (const CoincidentPointError&) {
      const auto [d, ij] = closest_pair<Scalar>(std::span<const Vec2<Scalar>>(y));
      throw CollisionError(ij.first, ij.second, static_cast<double>(state.t), static_cast<double>(d));
    }
  };
  auto check = [&](const Vec2List<Scalar>& y) {
    if (collision_floor <= Scalar(0) || y.size() < 2) return;
    const auto [d, ij] = closest_pair<Scalar>(std::span<const Vec2<Scalar>>(y));
    if (d < collision_floor)
      throw CollisionError(ij.first, ij.second, static_cast<double>(state.t), static_cast<double>(d));
  };
  PointVortexState<Scalar> next;
  next.positions = rk4_step<Scalar>(state.positions, dt, rhs, check);
  next.intensities = state.intensities;
  next.t = state.t + dt;
  return next;
}

struct CollisionReport {
  std::size_t first = 0;
  std::size_t second = 0;
  double t = 0.0;         ///< start time of the step in which the floor was crossed
  double distance = 0.0;  ///< offending separation
};

template <typename Scalar>
struct PVTrajectory {
  std::vector<Scalar> times;
  std::vector<Vec2List<Scalar>> snapshots;
  std::vector<Scalar> hamiltonian;
  std::vector<Vec2<Scalar>> linear_impulse;
  std::vector<Scalar> angular_impulse;
  std::vector<Scalar> min_separation;
  std::vector<Scalar> intensities;
  std::optional<CollisionReport> collision;
};

/// Fixed-step time grid from t0 to t_end: whole steps of dt, then one clipped
/// step so the final time is exactly t_end.
template <typename Scalar>
std::vector<Scalar> step_schedule(Scalar t0, Scalar t_end, Scalar dt) {
  std::vector<Scalar> steps;
  const Scalar span = t_end - t0;
  const auto whole = static_cast<std::size_t>(std::floor(span / dt * (Scalar(1) + Scalar(1e-12))));
  steps.assign(whole, dt);
  const Scalar rest = span - static_cast<Scalar>(whole) * dt;
  if (rest > dt * Scalar(1e-9)) steps.push_back(rest);
  return steps;
}

/// Repeated pv_step with a snapshot every `sample_every` steps (and at the
/// end). Stops early with a collision report if the floor is crossed.
template <typename Scalar>
PVTrajectory<Scalar> pv_integrate(PointVortexState<Scalar> state, Scalar dt, Scalar t_end,
                                  std::size_t sample_every = 1, Scalar collision_floor = Scalar(0)) {
  state.validate();
  if (!(dt > Scalar(0))) throw ValidationError("dt", "must be positive");
  if (!(t_end > state.t)) throw ValidationError("horizon", "must exceed the initial time");
  if (sample_every == 0) sample_every = 1;

  PVTrajectory<Scalar> traj;
  traj.intensities = state.intensities;
  auto record = [&](const PointVortexState<Scalar>& s) {
    traj.times.push_back(s.t);
    traj.snapshots.push_back(s.positions);
    traj.hamiltonian.push_back(pv_hamiltonian(s));
    const auto imp = pv_impulses(s);
    traj.linear_impulse.push_back(imp.linear);
    traj.angular_impulse.push_back(imp.angular);
    traj.min_separation.push_back(pv_min_separation(s));
  };
  record(state);

  const Scalar t0 = state.t;
  const auto steps = step_schedule<Scalar>(t0, t_end, dt);
  for (std::size_t k = 0; k < steps.size(); ++k) {
    try {
      state = pv_step<Scalar>(state, steps[k], collision_floor);
    } catch (const CollisionError& e) {
      traj.collision = CollisionReport{e.first, e.second, e.t, e.distance};
      if (traj.times.back() != state.t) record(state);
      return traj;
    }
    // Multiples of dt, not accumulated sums, so sampled times are exact grid points.
    state.t = k + 1 == steps.size() ? t_end : t0 + static_cast<Scalar>(k + 1) * dt;
    if ((k + 1) % sample_every == 0 || k + 1 == steps.size()) record(state);
  }
  return traj;
}

}  // namespace vortexlab

#endif  // VORTEXLAB_POINT_VORTEX_HPP
