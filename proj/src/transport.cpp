#include "vortexlab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "vortexlab/parallel.hpp"
#include "vortexlab/summation.hpp"

namespace vortexlab {

ComponentView component_view(const ParticleCloud& cloud, int component) {
  ComponentView view;
  double a = 0.0;
  bool positive = false;
  bool negative = false;
  for (std::size_t k = 0; k < cloud.size(); ++k) {
    if (cloud.tags[k] != component) continue;
    a += cloud.circulations[k];
    positive = positive || cloud.circulations[k] > 0.0;
    negative = negative || cloud.circulations[k] < 0.0;
  }
  if (positive && negative) throw DomainError("component " + std::to_string(component) + " has mixed signs");
  if (a == 0.0) throw DomainError("component " + std::to_string(component) + " has zero intensity");
  view.intensity = a;
  for (std::size_t k = 0; k < cloud.size(); ++k) {
    if (cloud.tags[k] != component || cloud.circulations[k] == 0.0) continue;
    view.positions.push_back(cloud.positions[k]);
    view.weights.push_back(cloud.circulations[k] / a);
  }
  return view;
}

ComponentView measure_view(const AtomicMeasure& measure) {
  measure.validate();
  ComponentView view;
  bool positive = false;
  bool negative = false;
  double a = 0.0;
  for (double m : measure.masses) {
    a += m;
    positive = positive || m > 0.0;
    negative = negative || m < 0.0;
  }
  if (positive && negative) throw DomainError("measure has mixed signs");
  if (a == 0.0) throw DomainError("measure has zero total mass");
  view.intensity = a;
  for (std::size_t k = 0; k < measure.size(); ++k) {
    if (measure.masses[k] == 0.0) continue;
    view.positions.push_back(measure.positions[k]);
    view.weights.push_back(measure.masses[k] / a);
  }
  return view;
}

Vec2d center_of_vorticity(const ComponentView& view) {
  Vec2d x = Vec2d::Zero();
  for (std::size_t k = 0; k < view.positions.size(); ++k) x += view.weights[k] * view.positions[k];
  return x;
}

Vec2d center_of_vorticity(const ParticleCloud& cloud, int component) {
  return center_of_vorticity(component_view(cloud, component));
}

Vec2d center_velocity(const ParticleCloud& cloud, int component, const KernelParams& params) {
  const double a = component_view(cloud, component).intensity;
  const double blob = cloud.blob_radius;
  (void)params;
  const std::vector<std::size_t> own = cloud.members(component);
  Vec2List<double> u(own.size());
  parallel_for(own.size(), [&](std::size_t t) {
    const Vec2d& x = cloud.positions[own[t]];
    PairwiseAccumulator<Vec2d> acc;
    for (std::size_t l = 0; l < cloud.size(); ++l) {
      if (cloud.tags[l] == component) continue;
      acc.add(Vec2d(cloud.circulations[l] * blob_kernel<double>(x - cloud.positions[l], blob)));
    }
    u[t] = acc.result();
  });
  PairwiseAccumulator<Vec2d> total;
  for (std::size_t t = 0; t < own.size(); ++t) total.add(Vec2d((cloud.circulations[own[t]] / a) * u[t]));
  return total.result();
}

double second_moment(const ComponentView& view, const Vec2d& y) {
  double s = 0.0;
  for (std::size_t k = 0; k < view.positions.size(); ++k) {
    const double dx = view.positions[k].x() - y.x();
    const double dy = view.positions[k].y() - y.y();
    s += view.weights[k] * (dx * dx + dy * dy);
  }
  return s;
}

double w2_to_dirac(const ComponentView& view, const Vec2d& y) { return std::sqrt(second_moment(view, y)); }

double w2_to_dirac(const ParticleCloud& cloud, int component, const Vec2d& y) {
  return w2_to_dirac(component_view(cloud, component), y);
}

double w2_to_dirac(const AtomicMeasure& measure, const Vec2d& y) { return w2_to_dirac(measure_view(measure), y); }

double outer_mass_about(const ComponentView& view, const Vec2d& center, double rho) {
  if (!(rho > 0.0)) throw ValidationError("rho", "must be positive");
  double m = 0.0;
  for (std::size_t k = 0; k < view.positions.size(); ++k)
    if (distance(view.positions[k], center) >= rho) m += view.weights[k];
  return m;
}

double outer_mass(const ComponentView& view, double rho) {
  return outer_mass_about(view, center_of_vorticity(view), rho);
}

double outer_mass(const ParticleCloud& cloud, int component, double rho) {
  return outer_mass(component_view(cloud, component), rho);
}

void CutoffSpec::validate() const {
  if (!(rho > 0.0)) throw ValidationError("rho", "must be positive");
  if (!(band > 0.0)) throw ValidationError("delta_r", "must be positive");
}

double cutoff_radial(const CutoffSpec& spec, double r) {
  if (r <= spec.rho) return 1.0;
  if (r >= spec.outer_radius()) return 0.0;
  const double s = (r - spec.rho) / spec.band;
  const double s3 = s * s * s;
  const double psi = 1.0 - s3 * (10.0 + s * (-15.0 + 6.0 * s));
  return std::clamp(psi, 0.0, 1.0);
}

double cutoff_radial_derivative(const CutoffSpec& spec, double r) {
  if (r <= spec.rho || r >= spec.outer_radius()) return 0.0;
  const double s = (r - spec.rho) / spec.band;
  return -30.0 * s * s * (1.0 - s) * (1.0 - s) / spec.band;
}

double cutoff_radial_second_derivative(const CutoffSpec& spec, double r) {
  if (r <= spec.rho || r >= spec.outer_radius()) return 0.0;
  const double s = (r - spec.rho) / spec.band;
  return -60.0 * s * (1.0 - s) * (1.0 - 2.0 * s) / (spec.band * spec.band);
}

double cutoff_eval(const CutoffSpec& spec, const Vec2d& x) {
  return cutoff_radial(spec, distance(x, spec.center));
}

double smoothed_outer_mass(const ComponentView& view, const CutoffSpec& spec) {
  spec.validate();
  double m = 0.0;
  for (std::size_t k = 0; k < view.positions.size(); ++k) {
    const double psi = cutoff_eval(spec, view.positions[k]);
    if (psi < 1.0) m += (1.0 - psi) * view.weights[k];
  }
  return m;
}

double smoothed_outer_mass(const ParticleCloud& cloud, int component, const CutoffSpec& spec) {
  return smoothed_outer_mass(component_view(cloud, component), spec);
}

Vec2d GridField::cell_center(std::size_t ix, std::size_t iy) const {
  return origin + pitch * Vec2d(static_cast<double>(ix) + 0.5, static_cast<double>(iy) + 0.5);
}

double GridField::total_mass() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * pitch * pitch;
}

double GridField::lp_norm(double p) const {
  double s = 0.0;
  for (double v : values) s += std::pow(std::abs(v), p);
  return std::pow(s * pitch * pitch, 1.0 / p);
}

double GridField::max_value() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, v);
  return m;
}

void GridField::validate() const {
  if (!(pitch > 0.0)) throw ValidationError("pitch", "must be positive");
  if (values.size() != nx * ny) throw ValidationError("field", "value count does not match the grid");
  for (double v : values)
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("field", "values must be finite and >= 0");
}

GridField deposit_density(std::span<const Vec2d> positions, std::span<const double> masses, double pitch) {
  if (!(pitch > 0.0)) throw ValidationError("pitch", "must be positive");
  if (positions.size() != masses.size()) throw ValidationError("field", "positions and masses differ in length");
  GridField field;
  field.pitch = pitch;
  if (positions.empty()) return field;
  Vec2d lo = positions[0];
  Vec2d hi = positions[0];
  for (const auto& p : positions) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  // Anchor the grid half a cell below the lowest atom so lattice-sampled
  // points sit at cell centres rather than on cell edges.
  field.origin = lo - Vec2d::Constant(0.5 * pitch);
  field.nx = static_cast<std::size_t>(std::floor((hi.x() - field.origin.x()) / pitch)) + 1;
  field.ny = static_cast<std::size_t>(std::floor((hi.y() - field.origin.y()) / pitch)) + 1;
  field.values.assign(field.nx * field.ny, 0.0);
  const double inv_area = 1.0 / (pitch * pitch);
  for (std::size_t k = 0; k < positions.size(); ++k) {
    const auto clamp_index = [](double v, std::size_t n) {
      const double i = std::floor(v);
      if (i < 0.0) return std::size_t{0};
      return std::min(static_cast<std::size_t>(i), n - 1);
    };
    const std::size_t ix = clamp_index((positions[k].x() - field.origin.x()) / pitch, field.nx);
    const std::size_t iy = clamp_index((positions[k].y() - field.origin.y()) / pitch, field.ny);
    field.at(ix, iy) += masses[k] * inv_area;
  }
  return field;
}

double rearrangement_profile(const GridField& field, double level) {
  if (!(level >= 0.0)) throw ValidationError("level", "must be >= 0");
  std::size_t count = 0;
  for (double v : field.values)
    if (v > level) ++count;
  return std::sqrt(static_cast<double>(count) * field.pitch * field.pitch / std::numbers::pi);
}

TailBound tail_velocity_bound_check(const GridField& field, const Vec2d& x, double L, double p) {
  if (!(p > 2.0)) throw ValidationError("p", "must be > 2");
  if (!(L > 0.0)) throw ValidationError("L", "must be positive");
  TailBound out;
  const double h2 = field.pitch * field.pitch;
  const double cutoff = 0.5 * field.pitch;
  for (std::size_t iy = 0; iy < field.ny; ++iy)
    for (std::size_t ix = 0; ix < field.nx; ++ix) {
      const double v = field.at(ix, iy);
      if (v == 0.0) continue;
      const double d = distance(x, field.cell_center(ix, iy));
      if (d < cutoff) continue;
      out.i2 += v * h2 / d;
    }
  const double mass = field.total_mass();
  if (mass == 0.0) return out;
  const double q = 2.0 * (p - 1.0);
  out.bound_rhs = std::pow(field.lp_norm(p), p / q) * std::pow(mass, (p - 2.0) / q);
  return out;
}

GridField component_tail_field(const ComponentView& view, const Vec2d& center, double L, double pitch) {
  if (!(L > 0.0)) throw ValidationError("L", "must be positive");
  std::vector<Vec2d> pts;
  std::vector<double> mass;
  for (std::size_t k = 0; k < view.positions.size(); ++k) {
    if (distance(view.positions[k], center) < 0.5 * L) continue;
    pts.push_back(view.positions[k]);
    mass.push_back(view.weights[k]);
  }
  return deposit_density(pts, mass, pitch);
}

AtomicMeasure cloud_measure(const ParticleCloud& cloud) {
  return AtomicMeasure(cloud.positions, cloud.circulations);
}

AtomicMeasure component_measure(const ParticleCloud& cloud, int component) {
  AtomicMeasure m;
  for (std::size_t k = 0; k < cloud.size(); ++k)
    if (cloud.tags[k] == component) m.add(cloud.positions[k], cloud.circulations[k]);
  return m;
}

AtomicMeasure dirac_measure(std::span<const Vec2d> positions, std::span<const double> intensities) {
  return AtomicMeasure(Vec2List<double>(positions.begin(), positions.end()),
                       std::vector<double>(intensities.begin(), intensities.end()));
}

}  // namespace vortexlab
