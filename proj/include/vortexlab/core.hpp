#ifndef VORTEXLAB_CORE_HPP
#define VORTEXLAB_CORE_HPP

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace vortexlab {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
using Vec2d = Vec2<double>;

template <typename Scalar>
using Vec2List = std::vector<Vec2<Scalar>>;

/// Counter-clockwise rotation by a quarter turn, z -> (-z_y, z_x).
template <typename Derived>
inline Vec2<typename Derived::Scalar> perp(const Eigen::MatrixBase<Derived>& z) {
  return Vec2<typename Derived::Scalar>(-z.y(), z.x());
}

template <typename Scalar>
inline constexpr Scalar inv_two_pi = Scalar(1) / (Scalar(2) * std::numbers::pi_v<Scalar>);

/// Euclidean distance used everywhere a support distance or radius is compared,
/// so that brute-force and indexed paths round identically.
template <typename Scalar>
inline Scalar distance(const Vec2<Scalar>& a, const Vec2<Scalar>& b) {
  const Scalar dx = a.x() - b.x();
  const Scalar dy = a.y() - b.y();
  return std::sqrt(dx * dx + dy * dy);
}

// Error hierarchy. Everything derives from std::runtime_error or
// std::domain_error so callers can catch coarse-grained.

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Kernel evaluated at a coincident source/target pair with no regularization.
struct CoincidentPointError : DomainError {
  using DomainError::DomainError;
};

/// Point vortices came closer than the configured floor.
struct CollisionError : std::runtime_error {
  CollisionError(std::size_t i, std::size_t j, double time, double separation)
      : std::runtime_error("vortices " + std::to_string(i) + " and " + std::to_string(j) +
                           " collided at t=" + std::to_string(time)),
        first(i), second(j), t(time), distance(separation) {}
  std::size_t first;
  std::size_t second;
  double t;
  double distance;
};

/// A configuration or argument violates a documented precondition.
struct ValidationError : std::invalid_argument {
  ValidationError(std::string field_name, const std::string& constraint)
      : std::invalid_argument(field_name + ": " + constraint), field(std::move(field_name)) {}
  std::string field;
};

/// Sampled initial data does not satisfy the hypotheses it was asked to realize.
struct SpecInconsistencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MassMismatchError : DomainError {
  using DomainError::DomainError;
};

struct DegenerateInputError : DomainError {
  using DomainError::DomainError;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace vortexlab

#endif  // VORTEXLAB_CORE_HPP
