#ifndef VORTEXLAB_TRANSPORT_HPP
#define VORTEXLAB_TRANSPORT_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "vortexlab/core.hpp"
#include "vortexlab/euler_vpm.hpp"
#include "vortexlab/kernel.hpp"
#include "vortexlab/optimal_transport.hpp"

namespace vortexlab {

/// Normalized masses q_k = Gamma_k / a_i of one component, summed in index
/// order. All component functionals below are built from these so that the
/// inequalities relating them hold on the computed values, not only in exact
/// arithmetic.
struct ComponentView {
  std::vector<Vec2d> positions;
  std::vector<double> weights;  ///< q_k > 0, summing to 1 up to rounding
  double intensity = 0.0;
};

ComponentView component_view(const ParticleCloud& cloud, int component);
ComponentView measure_view(const AtomicMeasure& measure);

Vec2d center_of_vorticity(const ParticleCloud& cloud, int component);
Vec2d center_of_vorticity(const ComponentView& view);

/// dX_i/dt from the pair sum over particles of component i against all other
/// components. The self-component term is left out since it cancels by
/// antisymmetry. The kernel core is the cloud's blob radius.
Vec2d center_velocity(const ParticleCloud& cloud, int component, const KernelParams& params = {});

/// (1/a_i) sum Gamma_k |x_k - y|^2: the squared W2 distance to a Dirac at y.
double second_moment(const ComponentView& view, const Vec2d& y);
double w2_to_dirac(const ComponentView& view, const Vec2d& y);
double w2_to_dirac(const ParticleCloud& cloud, int component, const Vec2d& y);
double w2_to_dirac(const AtomicMeasure& measure, const Vec2d& y);

/// Normalized mass at distance >= rho from the center of vorticity.
double outer_mass(const ComponentView& view, double rho);
double outer_mass(const ParticleCloud& cloud, int component, double rho);
/// Same, about an explicit center.
double outer_mass_about(const ComponentView& view, const Vec2d& center, double rho);

struct CutoffSpec {
  double rho = 1.0;   ///< psi = 1 inside this radius
  double band = 0.1;  ///< delta R: psi reaches 0 at rho + band
  Vec2d center = Vec2d::Zero();

  void validate() const;
  /// Outer edge of the band, rounded once and used by every comparison.
  [[nodiscard]] double outer_radius() const { return rho + band; }
};

/// Radial cutoff: 1 up to rho, 0 from rho + band on, and the quintic
/// smoothstep psi = 1 - (6 s^5 - 15 s^4 + 10 s^3), s = (r - rho)/band, between.
/// It is C^2 with |dpsi/dr| <= 15/(8 band) (at s = 1/2) and
/// |d^2psi/dr^2| <= 10/(sqrt(3) band^2) (at s = 1/2 -+ 1/(2 sqrt 3)).
double cutoff_eval(const CutoffSpec& spec, const Vec2d& x);
double cutoff_radial(const CutoffSpec& spec, double r);
double cutoff_radial_derivative(const CutoffSpec& spec, double r);
double cutoff_radial_second_derivative(const CutoffSpec& spec, double r);

/// (1/a_i) sum (1 - psi(x_k)) Gamma_k.
double smoothed_outer_mass(const ComponentView& view, const CutoffSpec& spec);
double smoothed_outer_mass(const ParticleCloud& cloud, int component, const CutoffSpec& spec);

/// Cell-centred density samples on a uniform grid; cell (ix, iy) has centre
/// origin + h (ix + 1/2, iy + 1/2) and carries mass value * h^2.
struct GridField {
  Vec2d origin = Vec2d::Zero();
  double pitch = 1.0;
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<double> values;  ///< row-major, iy * nx + ix

  [[nodiscard]] Vec2d cell_center(std::size_t ix, std::size_t iy) const;
  [[nodiscard]] double& at(std::size_t ix, std::size_t iy) { return values[iy * nx + ix]; }
  [[nodiscard]] double at(std::size_t ix, std::size_t iy) const { return values[iy * nx + ix]; }
  [[nodiscard]] double total_mass() const;
  [[nodiscard]] double lp_norm(double p) const;
  [[nodiscard]] double max_value() const;
  void validate() const;
};

/// Nearest-grid-point deposit of point masses into density cells of side
/// `pitch`. The grid starts half a cell below the lowest coordinates.
GridField deposit_density(std::span<const Vec2d> positions, std::span<const double> masses, double pitch);

/// l(s) = sqrt(|{zeta > s}| / pi): radius of the disc with the area of the
/// superlevel set, i.e. the symmetric-decreasing rearrangement read sideways.
double rearrangement_profile(const GridField& field, double level);

struct TailBound {
  double i2 = 0.0;
  double bound_rhs = 0.0;
};

/// I2 = sum zeta(y) h^2 / |x - y| over cells at least h/2 from x, and the
/// interpolation bound ||zeta||_p^{p/(2(p-1))} * mass^{(p-2)/(2(p-1))}. The
/// caller restricts zeta to the region |y - X| >= L/2 beforehand.
TailBound tail_velocity_bound_check(const GridField& field, const Vec2d& x, double L, double p);

/// The tail of component i beyond radius L/2 of `center`, deposited at
/// `pitch` with the normalized masses q_k.
GridField component_tail_field(const ComponentView& view, const Vec2d& center, double L, double pitch);

/// The cloud and the point-vortex state as signed atomic measures.
AtomicMeasure cloud_measure(const ParticleCloud& cloud);
AtomicMeasure component_measure(const ParticleCloud& cloud, int component);
AtomicMeasure dirac_measure(std::span<const Vec2d> positions, std::span<const double> intensities);

}  // namespace vortexlab

#endif  // VORTEXLAB_TRANSPORT_HPP
