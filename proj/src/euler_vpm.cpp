#include "vortexlab/euler_vpm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "vortexlab/point_vortex.hpp"
#include "vortexlab/quadtree.hpp"
#include "vortexlab/rk4.hpp"

namespace vortexlab {

std::string to_string(ProfileKind kind) {
  return kind == ProfileKind::compact_bump ? "compact_bump" : "bump_with_tail";
}

ProfileKind profile_from_string(const std::string& name) {
  if (name == "compact_bump") return ProfileKind::compact_bump;
  if (name == "bump_with_tail") return ProfileKind::bump_with_tail;
  throw ValidationError("profile", "must be compact_bump or bump_with_tail");
}

double BumpProfile::value(double r) {
  if (!(r < 1.0)) return 0.0;
  const double s = 1.0 - r * r;
  return (4.0 / std::numbers::pi) * s * s * s;
}

double BumpProfile::second_moment() { return 1.0 / (kPower + 2.0); }

double BumpProfile::lp_norm(double p) {
  return (4.0 / std::numbers::pi) * std::pow(std::numbers::pi / (kPower * p + 1.0), 1.0 / p);
}

// b(s) = s^2 (1-s)^2 in s = (r - R/2) / (R/2); int b(s) 2 pi r dr = 2 pi w (r_in/30 + w/60).
double TailProfile::value(double r, double support_radius) {
  const double inner = 0.5 * support_radius;
  const double width = 0.5 * support_radius;
  const double s = (r - inner) / width;
  if (!(s > 0.0 && s < 1.0)) return 0.0;
  const double norm = 2.0 * std::numbers::pi * width * (inner / 30.0 + width / 60.0);
  return s * s * (1.0 - s) * (1.0 - s) / norm;
}

double InitialDataSpec::density(std::size_t i, const Vec2d& x) const {
  const double r = distance(x, centers[i]);
  const double a = intensities[i];
  if (profile == ProfileKind::compact_bump)
    return a / (epsilon * epsilon) * BumpProfile::value(r / epsilon);
  const double tail_mass = std::pow(epsilon, tail_exponent);
  return a * ((1.0 - tail_mass) / (epsilon * epsilon) * BumpProfile::value(r / epsilon) +
              tail_mass * TailProfile::value(r, support_radius));
}

void InitialDataSpec::validate_parameters() const {
  if (!(epsilon > 0.0)) throw ValidationError("epsilon", "must be positive");
  if (!(support_radius > 0.0)) throw ValidationError("R", "must be positive");
  if (!(separation > 0.0)) throw ValidationError("delta", "must be positive");
  if (!(p > 2.0) || !std::isfinite(p)) throw ValidationError("p", "must be finite and > 2");
  if (gamma && !(*gamma > 0.0)) throw ValidationError("gamma", "must be positive");
  if (!(lambda > 0.0)) throw ValidationError("lambda", "must be positive");
  if (profile == ProfileKind::bump_with_tail && !(tail_exponent > 0.0))
    throw ValidationError("tail_fraction", "must be positive");
  if (epsilon > support_radius) throw ValidationError("epsilon", "must not exceed R");
  if (!(support_radius < separation)) throw ValidationError("R", "must be smaller than delta");
}

void InitialDataSpec::validate() const {
  if (centers.empty()) throw ValidationError("vortices", "at least one component is required");
  if (centers.size() != intensities.size())
    throw ValidationError("vortices", "centers and intensities differ in length");
  for (std::size_t i = 0; i < size(); ++i) {
    if (!std::isfinite(centers[i].x()) || !std::isfinite(centers[i].y()))
      throw ValidationError("center", "must be finite");
    if (!(intensities[i] != 0.0) || !std::isfinite(intensities[i]))
      throw ValidationError("intensity", "must be finite and nonzero");
  }
  validate_parameters();
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (distance(centers[i], centers[j]) < separation + 2.0 * support_radius)
        throw ValidationError("vortices", "centers must be at least delta + 2R apart");
  if (!pv_offsets.empty()) {
    if (pv_offsets.size() != size())
      throw ValidationError("offset", "one point-vortex offset per component is required");
    for (const auto& o : pv_offsets)
      if (!(o.norm() <= 1.0)) throw ValidationError("offset", "must have length <= 1 (units of epsilon)");
  }
}

double ParticleCloud::intensity(int component) const {
  double a = 0.0;
  for (std::size_t k = 0; k < size(); ++k)
    if (tags[k] == component) a += circulations[k];
  return a;
}

std::vector<std::size_t> ParticleCloud::members(int component) const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < size(); ++k)
    if (tags[k] == component) out.push_back(k);
  return out;
}

void ParticleCloud::validate() const {
  if (positions.size() != circulations.size() || positions.size() != tags.size())
    throw ValidationError("cloud", "positions, circulations and tags differ in length");
  if (!(blob_radius >= 0.0)) throw ValidationError("blob_radius", "must be >= 0");
  if (pitch && !(*pitch > 0.0)) throw ValidationError("pitch", "must be positive");
  std::vector<int> sign(static_cast<std::size_t>(std::max(components, 0)), 0);
  for (std::size_t k = 0; k < size(); ++k) {
    if (tags[k] < 0 || tags[k] >= components)
      throw ValidationError("tag", "component tag out of range");
    if (!std::isfinite(circulations[k]) || !std::isfinite(positions[k].x()) ||
        !std::isfinite(positions[k].y()))
      throw ValidationError("cloud", "non-finite particle data");
    const int s = circulations[k] > 0.0 ? 1 : (circulations[k] < 0.0 ? -1 : 0);
    int& seen = sign[static_cast<std::size_t>(tags[k])];
    if (s != 0 && seen != 0 && s != seen)
      throw ValidationError("gamma", "circulations within a component must share one sign");
    if (s != 0) seen = s;
  }
}

namespace {

double moment_about(const ParticleCloud& cloud, int component, const Vec2d& y) {
  const double a = cloud.intensity(component);
  double m = 0.0;
  for (std::size_t k = 0; k < cloud.size(); ++k)
    if (cloud.tags[k] == component) m += cloud.circulations[k] / a * (cloud.positions[k] - y).squaredNorm();
  return m;
}

}  // namespace

ParticleCloud sample_initial_cloud(const InitialDataSpec& spec, double pitch, double blob_radius,
                                   double jitter, std::uint64_t seed) {
  spec.validate();
  if (!(pitch > 0.0)) throw ValidationError("pitch", "must be positive");
  if (pitch > spec.epsilon / 4.0) throw ValidationError("pitch", "must resolve the core (h <= epsilon/4)");
  if (!(jitter >= 0.0 && jitter < 0.5)) throw ValidationError("grid_jitter", "must lie in [0, 0.5)");
  if (!(blob_radius >= 0.0)) throw ValidationError("blob_radius", "must be >= 0");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> shift(-jitter, jitter);

  ParticleCloud cloud;
  cloud.pitch = pitch;
  cloud.blob_radius = blob_radius;
  cloud.components = static_cast<int>(spec.size());
  const double reach = spec.profile == ProfileKind::compact_bump ? spec.epsilon : spec.support_radius;
  const auto half_cells = static_cast<long>(std::ceil(reach / pitch)) + 1;

  for (std::size_t i = 0; i < spec.size(); ++i) {
    const Vec2d origin = spec.centers[i] + pitch * Vec2d(shift(rng), shift(rng));
    std::vector<Vec2d> pts;
    std::vector<double> gam;
    double peak = 0.0;
    for (long iy = -half_cells; iy <= half_cells; ++iy) {
      for (long ix = -half_cells; ix <= half_cells; ++ix) {
        const Vec2d x = origin + pitch * Vec2d(static_cast<double>(ix), static_cast<double>(iy));
        const double g = spec.density(i, x) * pitch * pitch;
        if (g == 0.0) continue;
        pts.push_back(x);
        gam.push_back(g);
        peak = std::max(peak, std::abs(g));
      }
    }
    double total = 0.0;
    std::size_t kept_begin = cloud.size();
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (std::abs(gam[k]) < 1e-14 * peak) continue;
      cloud.positions.push_back(pts[k]);
      cloud.circulations.push_back(gam[k]);
      cloud.tags.push_back(static_cast<int>(i));
      total += gam[k];
    }
    if (cloud.size() == kept_begin)
      throw SpecInconsistencyError("component " + std::to_string(i) + " produced no particles");
    // The lattice sum is accurate to quadrature order only; renormalize so the
    // component carries its intensity and reject grossly under-resolved data.
    const double scale = spec.intensities[i] / total;
    if (std::abs(scale - 1.0) > 0.05)
      throw SpecInconsistencyError("pitch too coarse: sampled intensity off by " +
                                   std::to_string(std::abs(scale - 1.0)));
    for (std::size_t k = kept_begin; k < cloud.size(); ++k) cloud.circulations[k] *= scale;
  }

  // Post-conditions: the sample must realize the hypotheses it encodes.
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const int c = static_cast<int>(i);
    const double w2 = std::sqrt(moment_about(cloud, c, spec.centers[i]));
    if (w2 > spec.epsilon)
      throw SpecInconsistencyError("W2 to the center exceeds epsilon for component " + std::to_string(i));
    for (std::size_t k = 0; k < cloud.size(); ++k)
      if (cloud.tags[k] == c && !(distance(cloud.positions[k], spec.centers[i]) < spec.support_radius))
        throw SpecInconsistencyError("particle outside B_R for component " + std::to_string(i));
  }
  const double lp = lp_norm_estimate(cloud, spec.p);
  if (lp > spec.lambda * std::pow(spec.epsilon, -spec.effective_gamma()))
    throw SpecInconsistencyError("L^p norm exceeds Lambda * epsilon^-gamma");
  if (spec.size() >= 2 && component_support_distance(cloud) < spec.separation)
    throw SpecInconsistencyError("component supports closer than delta");
  return cloud;
}

Vec2List<double> vpm_rhs(const ParticleCloud& cloud, std::span<const Vec2d> positions,
                         const VpmParams& params) {
  KernelParams kp = params.kernel;
  kp.blob_radius = cloud.blob_radius;
  const std::span<const double> gamma(cloud.circulations);
  if (positions.size() <= params.crossover)
    return direct_self_velocity<double>(positions, gamma, kp);
  const QuadTree tree(positions, gamma, kp.leaf_size);
  return tree_self_velocity(tree, positions, kp);
}

Vec2List<double> vpm_rhs(const ParticleCloud& cloud, const VpmParams& params) {
  return vpm_rhs(cloud, std::span<const Vec2d>(cloud.positions), params);
}

ParticleCloud vpm_step(const ParticleCloud& cloud, double dt, const VpmParams& params) {
  if (!(dt > 0.0)) throw ValidationError("dt", "must be positive");
  ParticleCloud next;
  next.positions = rk4_step<double>(cloud.positions, dt, [&](const Vec2List<double>& y) {
    return vpm_rhs(cloud, std::span<const Vec2d>(y), params);
  });
  next.circulations = cloud.circulations;
  next.tags = cloud.tags;
  next.pitch = cloud.pitch;
  next.blob_radius = cloud.blob_radius;
  next.components = cloud.components;
  next.t = cloud.t + dt;
  return next;
}

namespace {

std::vector<std::vector<Vec2d>> group_by_component(const ParticleCloud& cloud) {
  std::vector<std::vector<Vec2d>> groups(static_cast<std::size_t>(std::max(cloud.components, 0)));
  for (std::size_t k = 0; k < cloud.size(); ++k)
    groups[static_cast<std::size_t>(cloud.tags[k])].push_back(cloud.positions[k]);
  return groups;
}

Vec2d mean_of(const std::vector<Vec2d>& pts) {
  Vec2d m = Vec2d::Zero();
  for (const auto& p : pts) m += p;
  return m / static_cast<double>(pts.size());
}

// Exact min distance between two point sets: sort one set by projection on
// the axis joining the means and scan only the slab that can still improve.
double min_distance_between(const std::vector<Vec2d>& a, const std::vector<Vec2d>& b) {
  const std::vector<Vec2d>& query = a.size() <= b.size() ? a : b;
  const std::vector<Vec2d>& other = a.size() <= b.size() ? b : a;
  Vec2d axis = mean_of(other) - mean_of(query);
  const double len = axis.norm();
  axis = len > 0.0 ? Vec2d(axis / len) : Vec2d(1.0, 0.0);

  std::vector<std::pair<double, std::size_t>> proj(other.size());
  for (std::size_t k = 0; k < other.size(); ++k) proj[k] = {axis.dot(other[k]), k};
  std::sort(proj.begin(), proj.end());

  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : query) {
    const double s = axis.dot(p);
    const double slack = 1e-12 * (1.0 + std::abs(s));
    const auto mid = std::lower_bound(proj.begin(), proj.end(), std::make_pair(s, std::size_t{0}));
    for (auto it = mid; it != proj.end(); ++it) {
      if (it->first - s > best + slack) break;
      best = std::min(best, distance(p, other[it->second]));
    }
    for (auto it = mid; it != proj.begin();) {
      --it;
      if (s - it->first > best + slack) break;
      best = std::min(best, distance(p, other[it->second]));
    }
  }
  return best;
}

}  // namespace

SupportDistance component_support_distance_detail(const ParticleCloud& cloud) {
  const auto groups = group_by_component(cloud);
  SupportDistance out{std::numeric_limits<double>::infinity(), -1, -1};
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (groups[i].empty()) continue;
    for (std::size_t j = i + 1; j < groups.size(); ++j) {
      if (groups[j].empty()) continue;
      const double d = min_distance_between(groups[i], groups[j]);
      if (d < out.distance || out.first < 0) {
        out.distance = std::min(out.distance, d);
        out.first = static_cast<int>(i);
        out.second = static_cast<int>(j);
      }
    }
  }
  return out;
}

double component_support_distance(const ParticleCloud& cloud) {
  return component_support_distance_detail(cloud).distance;
}

double component_support_distance_lower_bound(const ParticleCloud& cloud) {
  const auto groups = group_by_component(cloud);
  std::vector<Vec2d> center(groups.size());
  std::vector<double> radius(groups.size(), -1.0);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (groups[i].empty()) continue;
    center[i] = mean_of(groups[i]);
    radius[i] = 0.0;
    for (const auto& p : groups[i]) radius[i] = std::max(radius[i], distance(p, center[i]));
  }
  double bound = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < groups.size(); ++i)
    for (std::size_t j = i + 1; j < groups.size(); ++j) {
      if (radius[i] < 0.0 || radius[j] < 0.0) continue;
      // Shrink by a relative hair so rounding can only make the bound smaller.
      const double b = (distance(center[i], center[j]) - radius[i] - radius[j]) * (1.0 - 1e-12) - 1e-300;
      bound = std::min(bound, std::max(b, 0.0));
    }
  return bound;
}

double lp_norm_estimate(const ParticleCloud& cloud, double p, std::optional<int> component) {
  if (!cloud.pitch) throw DomainError("L^p estimate needs a uniform sampling pitch");
  if (!(p > 0.0)) throw ValidationError("p", "must be positive");
  const double h2 = *cloud.pitch * *cloud.pitch;
  double sum = 0.0;
  for (std::size_t k = 0; k < cloud.size(); ++k) {
    if (component && cloud.tags[k] != *component) continue;
    sum += std::pow(std::abs(cloud.circulations[k] / h2), p) * h2;
  }
  return std::pow(sum, 1.0 / p);
}

VpmRun vpm_integrate(ParticleCloud cloud, double dt, double t_end, std::size_t cadence_steps,
                     const SeparationStop& stop, const VpmParams& params, const CloudObserver& observer) {
  cloud.validate();
  if (!(dt > 0.0)) throw ValidationError("dt", "must be positive");
  if (!(t_end >= cloud.t)) throw ValidationError("horizon", "must not precede the cloud time");
  if (cadence_steps == 0) cadence_steps = 1;
  if (observer) observer(cloud);

  VpmRun run;
  const double t0 = cloud.t;
  const auto steps = t_end > t0 ? step_schedule<double>(t0, t_end, dt) : std::vector<double>{};
  for (std::size_t k = 0; k < steps.size(); ++k) {
    cloud = vpm_step(cloud, steps[k], params);
    cloud.t = k + 1 == steps.size() ? t_end : t0 + static_cast<double>(k + 1) * dt;
    bool separated = false;
    if (stop.enabled && cloud.components >= 2 &&
        component_support_distance_lower_bound(cloud) < stop.threshold) {
      const auto sd = component_support_distance_detail(cloud);
      if (sd.distance < stop.threshold) {
        separated = true;
        run.report.separated = true;
        run.report.separation_time = cloud.t;
        run.report.first = sd.first;
        run.report.second = sd.second;
        run.report.distance = sd.distance;
      }
    }
    const bool last = separated || k + 1 == steps.size();
    if (observer && ((k + 1) % cadence_steps == 0 || last)) observer(cloud);
    if (separated) break;
  }
  run.report.t_final = cloud.t;
  run.cloud = std::move(cloud);
  return run;
}

}  // namespace vortexlab
