#ifndef VORTEXLAB_EULER_VPM_HPP
#define VORTEXLAB_EULER_VPM_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vortexlab/core.hpp"
#include "vortexlab/kernel.hpp"

namespace vortexlab {

enum class ProfileKind { compact_bump, bump_with_tail };

std::string to_string(ProfileKind kind);
ProfileKind profile_from_string(const std::string& name);

/// Mother profile phi(r) = (4/pi) (1 - r^2)^3 on the unit disc.
///
/// Closed forms: int phi = 1, second moment int |x|^2 phi = 1/5,
/// ||phi||_p^p = (4/pi)^p * pi / (3p + 1).
struct BumpProfile {
  static constexpr int kPower = 3;
  static double value(double r);
  static double second_moment();
  static double lp_norm(double p);
};

/// Normalized annular tail density on R/2 < r < R (unit mass).
struct TailProfile {
  static double value(double r, double support_radius);
};

/// Concentrated initial vorticity: N components of definite sign around
/// centers, each a rescaled bump of width epsilon inside B_R(center).
struct InitialDataSpec {
  std::vector<Vec2d> centers;
  std::vector<double> intensities;
  double epsilon = 0.1;
  double support_radius = 0.25;  ///< R
  double separation = 1.0;       ///< delta
  double p = 4.0;
  std::optional<double> gamma;   ///< defaults to the profile's own exponent
  double lambda = 10.0;
  ProfileKind profile = ProfileKind::compact_bump;
  double tail_exponent = 3.0;  ///< beta: tail carries mass fraction epsilon^beta
  /// Point-vortex start Ybar_i = Xbar_i + epsilon * offset_i (empty means zero offsets).
  std::vector<Vec2d> pv_offsets;

  [[nodiscard]] std::size_t size() const { return centers.size(); }
  /// Exponent realized by the rescaled profile: ||omega||_p ~ eps^{-2(p-1)/p}.
  [[nodiscard]] double profile_gamma() const { return 2.0 * (p - 1.0) / p; }
  [[nodiscard]] double effective_gamma() const { return gamma.value_or(profile_gamma()); }
  [[nodiscard]] Vec2d pv_start(std::size_t i) const {
    return pv_offsets.empty() ? centers[i] : Vec2d(centers[i] + epsilon * pv_offsets[i]);
  }
  /// Vorticity density of component i at x (closed form).
  [[nodiscard]] double density(std::size_t i, const Vec2d& x) const;

  /// Scalar parameters only (epsilon, R, delta, p, ...), no geometry.
  void validate_parameters() const;
  void validate() const;
  bool operator==(const InitialDataSpec&) const = default;
};

/// Discrete vorticity: point circulations with component tags.
struct ParticleCloud {
  Vec2List<double> positions;
  std::vector<double> circulations;  ///< never mutated by stepping
  std::vector<int> tags;
  std::optional<double> pitch;  ///< sampling pitch h; unset for resampled clouds
  double blob_radius = 0.0;
  double t = 0.0;
  int components = 0;

  [[nodiscard]] std::size_t size() const { return positions.size(); }
  [[nodiscard]] double intensity(int component) const;
  [[nodiscard]] std::vector<std::size_t> members(int component) const;
  void validate() const;
};

/// Midpoint-grid sampling of the initial data at pitch h, followed by the
/// post-condition checks (concentration, support, L^p scaling, separation).
/// `jitter` in [0, 0.5) shifts each component's grid by a seeded random
/// fraction of a cell.
ParticleCloud sample_initial_cloud(const InitialDataSpec& spec, double pitch, double blob_radius,
                                   double jitter = 0.0, std::uint64_t seed = 0);

struct VpmParams {
  KernelParams kernel;             ///< blob radius is taken from the cloud
  std::size_t crossover = 2000;    ///< direct summation up to this many particles

  bool operator==(const VpmParams&) const = default;
};

/// Particle velocities for the cloud's circulations evaluated at `positions`.
Vec2List<double> vpm_rhs(const ParticleCloud& cloud, std::span<const Vec2d> positions,
                         const VpmParams& params);
Vec2List<double> vpm_rhs(const ParticleCloud& cloud, const VpmParams& params);

/// RK4 advection of particle positions; circulations and tags are untouched.
ParticleCloud vpm_step(const ParticleCloud& cloud, double dt, const VpmParams& params);

struct SupportDistance {
  double distance = 0.0;  ///< +inf with fewer than two populated components
  int first = -1;
  int second = -1;
};

/// Minimum over component pairs of the minimum inter-particle distance.
SupportDistance component_support_distance_detail(const ParticleCloud& cloud);
double component_support_distance(const ParticleCloud& cloud);

/// Cheap lower bound on component_support_distance from bounding circles.
double component_support_distance_lower_bound(const ParticleCloud& cloud);

/// (sum_k |Gamma_k / h^2|^p h^2)^(1/p) over the whole cloud or one component.
double lp_norm_estimate(const ParticleCloud& cloud, double p,
                        std::optional<int> component = std::nullopt);

struct SeparationStop {
  bool enabled = true;
  double threshold = 0.0;  ///< stop once the support distance drops below this (delta/2)
};

struct StopReport {
  bool separated = false;  ///< false means the run reached its horizon
  double t_final = 0.0;
  double separation_time = 0.0;  ///< measured T when separated
  int first = -1;
  int second = -1;
  double distance = 0.0;
};

using CloudObserver = std::function<void(const ParticleCloud&)>;

struct VpmRun {
  ParticleCloud cloud;
  StopReport report;
};

/// Advances to t_end or to the first step after which the support distance
/// falls below the stop threshold. `observer` sees the initial cloud, every
/// `cadence_steps`-th cloud and the final one.
VpmRun vpm_integrate(ParticleCloud cloud, double dt, double t_end, std::size_t cadence_steps,
                     const SeparationStop& stop, const VpmParams& params,
                     const CloudObserver& observer = {});

}  // namespace vortexlab

#endif  // VORTEXLAB_EULER_VPM_HPP
