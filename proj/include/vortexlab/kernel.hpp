#ifndef VORTEXLAB_KERNEL_HPP
#define VORTEXLAB_KERNEL_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "vortexlab/core.hpp"
#include "vortexlab/parallel.hpp"
#include "vortexlab/summation.hpp"

namespace vortexlab {

/// Numerical knobs shared by direct and tree summation.
struct KernelParams {
  double blob_radius = 0.0;    ///< algebraic blob core; 0 gives the singular kernel
  double theta = 0.5;          ///< Barnes-Hut opening angle, in (0, 1); 0 opens everything
  bool deterministic = true;   ///< canonical source-order pairwise summation
  std::size_t leaf_size = 16;  ///< maximum particles per quadtree leaf

  void validate() const {
    if (!(blob_radius >= 0.0) || !std::isfinite(blob_radius))
      throw ValidationError("blob_radius", "must be finite and >= 0");
    if (!(theta >= 0.0 && theta < 1.0)) throw ValidationError("theta", "must lie in [0, 1)");
    if (leaf_size == 0) throw ValidationError("leaf_size", "must be positive");
  }

  bool operator==(const KernelParams&) const = default;
};

/// K(z) = z^perp / (2 pi |z|^2 + ...) with an algebraic core of radius
/// `blob_radius`. With blob_radius = 0 this is the Biot-Savart kernel itself;
/// both paths share this expression so they agree bitwise.
template <typename Scalar>
inline Vec2<Scalar> blob_kernel(const Vec2<Scalar>& z, Scalar blob_radius) {
  const Scalar r2 = z.x() * z.x() + z.y() * z.y() + blob_radius * blob_radius;
  if (r2 == Scalar(0)) {
    if (blob_radius == Scalar(0) && z.x() == Scalar(0) && z.y() == Scalar(0))
      throw CoincidentPointError("kernel evaluated at z = 0 without regularization");
    return Vec2<Scalar>::Zero();
  }
  const Scalar c = inv_two_pi<Scalar> / r2;
  return Vec2<Scalar>(-z.y() * c, z.x() * c);
}

/// Biot-Savart kernel K(z) = (1/2pi) z^perp / |z|^2.
template <typename Scalar>
inline Vec2<Scalar> biot_savart(const Vec2<Scalar>& z) {
  if (z.x() == Scalar(0) && z.y() == Scalar(0))
    throw CoincidentPointError("Biot-Savart kernel is singular at z = 0");
  return blob_kernel<Scalar>(z, Scalar(0));
}

/// Newtonian potential G(z) = -(1/2pi) log|z|; K is its rotated gradient.
template <typename Scalar>
inline Scalar newtonian_potential(const Vec2<Scalar>& z) {
  if (z.x() == Scalar(0) && z.y() == Scalar(0))
    throw CoincidentPointError("Newtonian potential is singular at z = 0");
  return -inv_two_pi<Scalar> * std::log(std::hypot(z.x(), z.y()));
}

namespace detail {

// `skip` is the source index to omit (self-interaction), or npos.
template <typename Scalar>
Vec2<Scalar> direct_sum_one(std::span<const Vec2<Scalar>> src_pos, std::span<const Scalar> src_gamma,
                            const Vec2<Scalar>& x, Scalar blob, bool deterministic,
                            std::size_t skip) {
  if (deterministic) {
    PairwiseAccumulator<Vec2<Scalar>> acc;
    for (std::size_t k = 0; k < src_pos.size(); ++k) {
      if (k == skip) continue;
      acc.add(Vec2<Scalar>(src_gamma[k] * blob_kernel<Scalar>(x - src_pos[k], blob)));
    }
    return acc.result();
  }
  Vec2<Scalar> u = Vec2<Scalar>::Zero();
  for (std::size_t k = 0; k < src_pos.size(); ++k) {
    if (k == skip) continue;
    u += src_gamma[k] * blob_kernel<Scalar>(x - src_pos[k], blob);
  }
  return u;
}

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

}  // namespace detail

/// Velocity induced at `targets` by point circulations: sum_k gamma_k K_blob(x - x_k).
template <typename Scalar>
Vec2List<Scalar> direct_velocity(std::span<const Vec2<Scalar>> src_pos,
                                 std::span<const Scalar> src_gamma,
                                 std::span<const Vec2<Scalar>> targets, const KernelParams& params) {
  if (src_pos.size() != src_gamma.size())
    throw ValidationError("sources", "positions and circulations differ in length");
  params.validate();
  Vec2List<Scalar> out(targets.size());
  const Scalar blob = static_cast<Scalar>(params.blob_radius);
  parallel_for(targets.size(), [&](std::size_t t) {
    out[t] = detail::direct_sum_one<Scalar>(src_pos, src_gamma, targets[t], blob,
                                            params.deterministic, detail::npos);
  });
  return out;
}

/// Self-interaction variant: targets are the sources, and the k = target
/// term is omitted.
template <typename Scalar>
Vec2List<Scalar> direct_self_velocity(std::span<const Vec2<Scalar>> pos,
                                      std::span<const Scalar> gamma, const KernelParams& params) {
  if (pos.size() != gamma.size())
    throw ValidationError("sources", "positions and circulations differ in length");
  params.validate();
  Vec2List<Scalar> out(pos.size());
  const Scalar blob = static_cast<Scalar>(params.blob_radius);
  parallel_for(pos.size(), [&](std::size_t t) {
    out[t] = detail::direct_sum_one<Scalar>(pos, gamma, pos[t], blob, params.deterministic, t);
  });
  return out;
}

/// Velocity at x split into the part induced by particles tagged `component`
/// (u_i) and the far field of every other particle (F_i). A source sitting
/// exactly at x is treated as the self pair and skipped.
template <typename Scalar>
std::pair<Vec2<Scalar>, Vec2<Scalar>> split_velocity(std::span<const Vec2<Scalar>> pos,
                                                     std::span<const Scalar> gamma,
                                                     std::span<const int> tags, int component,
                                                     const Vec2<Scalar>& x,
                                                     const KernelParams& params) {
  if (pos.size() != gamma.size() || pos.size() != tags.size())
    throw ValidationError("cloud", "positions, circulations and tags differ in length");
  const Scalar blob = static_cast<Scalar>(params.blob_radius);
  PairwiseAccumulator<Vec2<Scalar>> own;
  PairwiseAccumulator<Vec2<Scalar>> far;
  for (std::size_t k = 0; k < pos.size(); ++k) {
    if (pos[k] == x) continue;
    const Vec2<Scalar> term = gamma[k] * blob_kernel<Scalar>(x - pos[k], blob);
    (tags[k] == component ? own : far).add(term);
  }
  return {own.result(), far.result()};
}

}  // namespace vortexlab

#endif  // VORTEXLAB_KERNEL_HPP
