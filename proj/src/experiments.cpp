#include "vortexlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "vortexlab/transport.hpp"

namespace vortexlab {

void NumericsConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt", "must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ValidationError("horizon", "must be positive");
  if (!(particles_per_core > 0.0)) throw ValidationError("particles_per_core", "must be positive");
  if (pitch && !(*pitch > 0.0)) throw ValidationError("pitch", "must be positive");
  if (!(blob_factor >= 0.0)) throw ValidationError("blob_factor", "must be >= 0");
  if (!(theta >= 0.0 && theta < 1.0)) throw ValidationError("theta", "must lie in [0, 1)");
  if (leaf_size == 0) throw ValidationError("leaf_size", "must be positive");
  if (!(grid_jitter >= 0.0 && grid_jitter < 0.5)) throw ValidationError("grid_jitter", "must lie in [0, 0.5)");
  if (!(cadence > 0.0)) throw ValidationError("cadence", "must be positive");
  if (!(steps_per_core_turn >= 0.0)) throw ValidationError("steps_per_core_turn", "must be >= 0");
  if (collision_floor && !(*collision_floor >= 0.0)) throw ValidationError("collision_floor", "must be >= 0");
}

PairingSetup prepare_pairing(const InitialDataSpec& spec, const NumericsConfig& numerics) {
  spec.validate();
  numerics.validate();
  const double pitch = numerics.pitch.value_or(spec.epsilon / numerics.particles_per_core);
  PairingSetup setup;
  setup.cloud = sample_initial_cloud(spec, pitch, numerics.blob_factor * pitch, numerics.grid_jitter,
                                     numerics.seed);
  for (std::size_t i = 0; i < spec.size(); ++i) {
    setup.vortices.positions.push_back(spec.pv_start(i));
    setup.vortices.intensities.push_back(spec.intensities[i]);
  }
  setup.vortices.validate();
  setup.dt = numerics.dt;
  if (numerics.steps_per_core_turn > 0.0) {
    double a = 0.0;
    for (double ai : spec.intensities) a = std::max(a, std::abs(ai));
    const double turnover = std::numbers::pi * std::numbers::pi * spec.epsilon * spec.epsilon / a;
    setup.dt = std::min(setup.dt, turnover / numerics.steps_per_core_turn);
  }
  return setup;
}

DiagnosticsRecord make_record(const InitialDataSpec& spec, const ParticleCloud& cloud,
                              const PointVortexState<double>& vortices, const KernelParams& kernel) {
  DiagnosticsRecord rec;
  rec.t = cloud.t;
  const auto pv_velocity = pv_rhs(vortices);
  const double R = spec.support_radius;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const int c = static_cast<int>(i);
    const ComponentView view = component_view(cloud, c);
    ComponentDiagnostics d;
    d.X = center_of_vorticity(view);
    d.Y = vortices.positions[i];
    d.w2_pv = w2_to_dirac(view, d.Y);
    d.w2_center = w2_to_dirac(view, d.X);
    d.center_gap = distance(d.X, d.Y);
    d.vel_gap = (center_velocity(cloud, c, kernel) - pv_velocity[i]).norm();
    d.m_R = outer_mass_about(view, d.X, R);
    d.m_2R = outer_mass_about(view, d.X, 2.0 * R);
    d.mu = smoothed_outer_mass(view, CutoffSpec{2.0 * R - R / 8.0, R / 8.0, d.X});
    rec.components.push_back(d);
  }
  rec.w1_total = w1_signed(cloud_measure(cloud), dirac_measure(vortices.positions, vortices.intensities));
  rec.min_sep_cloud = component_support_distance(cloud);
  rec.min_sep_pv = pv_min_separation(vortices);
  return rec;
}

namespace {

void sample_tail(const InitialDataSpec& spec, const ParticleCloud& cloud, const DiagnosticsRecord& rec,
                 double pitch, std::vector<TailSample>& out) {
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const auto& d = rec.components[i];
    // Split the component at its own concentration radius: L/2 = W2 to the center.
    const double L = 2.0 * d.w2_center;
    if (!(L > 0.0)) continue;
    const ComponentView view = component_view(cloud, static_cast<int>(i));
    const GridField field = component_tail_field(view, d.X, L, pitch);
    const TailBound tb = tail_velocity_bound_check(field, d.X + Vec2d(L, 0.0), L, spec.p);
    if (tb.bound_rhs > 0.0) out.push_back({rec.t, static_cast<int>(i), tb.i2, tb.bound_rhs});
  }
}

}  // namespace

PairingRun run_pairing(const InitialDataSpec& spec, const NumericsConfig& numerics,
                       const RecordObserver& observer) {
  PairingSetup setup = prepare_pairing(spec, numerics);
  PairingRun run;
  run.dt = setup.dt;
  run.pitch = *setup.cloud.pitch;
  run.blob_radius = setup.cloud.blob_radius;
  run.particles = setup.cloud.size();
  run.horizon = numerics.horizon;
  run.initial_cloud = setup.cloud;

  VpmParams vp;
  vp.kernel.theta = numerics.theta;
  vp.kernel.deterministic = numerics.deterministic;
  vp.kernel.leaf_size = numerics.leaf_size;
  vp.crossover = numerics.crossover;
  KernelParams record_kernel = vp.kernel;
  record_kernel.blob_radius = setup.cloud.blob_radius;

  const double half_delta = 0.5 * spec.separation;
  const double floor = numerics.collision_floor.value_or(0.25 * spec.separation);
  const auto cadence_steps =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(numerics.cadence / setup.dt)));

  ParticleCloud cloud = std::move(setup.cloud);
  PointVortexState<double> pv = std::move(setup.vortices);

  auto record = [&]() -> bool {
    try {
      DiagnosticsRecord rec = make_record(spec, cloud, pv, record_kernel);
      if (numerics.tail_monitor) sample_tail(spec, cloud, rec, run.pitch, run.tail);
      if (observer) observer(rec);
      run.records.push_back(std::move(rec));
      return true;
    } catch (const std::exception& e) {
      run.failure = std::string("diagnostics failed: ") + e.what();
      return false;
    }
  };

  run.t_run = 0.0;
  if (!record()) {
    run.final_cloud = std::move(cloud);
    return run;
  }

  const auto steps = step_schedule<double>(0.0, numerics.horizon, setup.dt);
  for (std::size_t k = 0; k < steps.size(); ++k) {
    try {
      ParticleCloud next = vpm_step(cloud, steps[k], vp);
      pv = pv_step<double>(pv, steps[k], floor);
      cloud = std::move(next);
    } catch (const std::exception& e) {
      run.failure = e.what();
      break;
    }
    const bool last = k + 1 == steps.size();
    const double t = last ? numerics.horizon : static_cast<double>(k + 1) * setup.dt;
    cloud.t = t;
    pv.t = t;
    run.t_run = t;

    bool stop = false;
    if (spec.size() >= 2 && component_support_distance_lower_bound(cloud) < half_delta &&
        component_support_distance(cloud) < half_delta) {
      run.separation_time = t;
      stop = true;
    }
    if (pv_min_separation(pv) < half_delta) {
      run.pv_separation_time = t;
      stop = true;
    }
    if ((k + 1) % cadence_steps == 0 || last || stop) {
      if (!record()) break;
    }
    if (stop) break;
  }
  run.final_cloud = std::move(cloud);
  return run;
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 2) throw DegenerateInputError("a rate fit needs at least two points");
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [e, v] : pairs) {
    if (!(e > 0.0) || !(v > 0.0)) throw DomainError("rate fit needs positive abscissae and values");
    mx += std::log(e);
    my += std::log(v);
  }
  const double n = static_cast<double>(pairs.size());
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& [e, v] : pairs) {
    sxx += (std::log(e) - mx) * (std::log(e) - mx);
    sxy += (std::log(e) - mx) * (std::log(v) - my);
  }
  if (!(sxx > 0.0)) throw DegenerateInputError("a rate fit needs at least two distinct abscissae");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (const auto& [e, v] : pairs) {
    const double r = std::log(v) - (fit.intercept + fit.slope * std::log(e));
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

GronwallFit fit_gronwall(const std::vector<DiagnosticsRecord>& records, int component) {
  if (records.size() < 2) throw DegenerateInputError("a growth fit needs at least two records");
  double mt = 0.0;
  double my = 0.0;
  for (const auto& r : records) {
    const double w = r.components.at(static_cast<std::size_t>(component)).w2_center;
    if (!(w > 0.0)) throw DegenerateInputError("W2 to the center must be positive for a growth fit");
    mt += r.t;
    my += std::log(w);
  }
  const double n = static_cast<double>(records.size());
  mt /= n;
  my /= n;
  double stt = 0.0;
  double sty = 0.0;
  for (const auto& r : records) {
    const double y = std::log(r.components[static_cast<std::size_t>(component)].w2_center);
    stt += (r.t - mt) * (r.t - mt);
    sty += (r.t - mt) * (y - my);
  }
  if (!(stt > 0.0)) throw DegenerateInputError("a growth fit needs at least two distinct times");
  GronwallFit fit;
  fit.C = sty / stt;
  const double intercept = my - fit.C * mt;
  fit.prefactor = std::exp(intercept);
  double ss = 0.0;
  for (const auto& r : records) {
    const double y = std::log(r.components[static_cast<std::size_t>(component)].w2_center);
    const double res = y - (intercept + fit.C * r.t);
    ss += res * res;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

ThresholdMonitor threshold_monitor(const std::vector<DiagnosticsRecord>& records, const InitialDataSpec& spec,
                                   int component) {
  ThresholdMonitor mon;
  mon.alpha = spec.p * spec.effective_gamma() / (spec.p - 2.0);
  mon.level = std::pow(spec.epsilon, mon.alpha);
  const double two_r = 2.0 * spec.support_radius;
  for (const auto& r : records) {
    const auto& d = r.components.at(static_cast<std::size_t>(component));
    mon.times.push_back(r.t);
    mon.m_2R.push_back(d.m_2R);
    mon.chebyshev_ceiling.push_back(d.w2_center * d.w2_center / (two_r * two_r));
    if (!mon.crossing && d.m_2R >= mon.level) mon.crossing = r.t;
  }
  return mon;
}

const FamilyFit* SweepResult::find(const std::string& family, int component) const {
  for (const auto& f : fits)
    if (f.family == family && f.component == component) return &f;
  return nullptr;
}

SweepResult run_sweep(const InitialDataSpec& base, const std::vector<double>& epsilons,
                      const NumericsConfig& numerics,
                      const std::function<void(std::size_t, const SweepMember&)>& progress) {
  if (epsilons.empty()) throw ValidationError("epsilons", "must not be empty");
  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    if (!(epsilons[k] > 0.0) || epsilons[k] > base.support_radius)
      throw ValidationError("epsilons", "each value must lie in (0, R]");
    if (k > 0 && !(epsilons[k] < epsilons[k - 1]))
      throw ValidationError("epsilons", "must be strictly decreasing");
  }
  SweepResult result;
  result.epsilons = epsilons;
  NumericsConfig member_numerics = numerics;
  member_numerics.pitch.reset();  // h follows eps through particles_per_core

  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    SweepMember m;
    m.epsilon = epsilons[k];
    InitialDataSpec spec = base;
    spec.epsilon = epsilons[k];
    try {
      m.run = run_pairing(spec, member_numerics);
      if (m.run.failure) {
        m.failed = true;
        m.failure = *m.run.failure;
      }
    } catch (const std::exception& e) {
      m.failed = true;
      m.failure = e.what();
    }
    m.sup.resize(spec.size());
    for (const auto& r : m.run.records) {
      m.sup_w1 = std::max(m.sup_w1, r.w1_total);
      for (std::size_t i = 0; i < spec.size(); ++i) {
        const auto& d = r.components[i];
        auto& s = m.sup[i];
        s.w2_pv = std::max(s.w2_pv, d.w2_pv);
        s.w2_center = std::max(s.w2_center, d.w2_center);
        s.center_gap = std::max(s.center_gap, d.center_gap);
        s.vel_gap = std::max(s.vel_gap, d.vel_gap);
      }
    }
    for (const auto& tail : m.run.tail) {
      auto& s = m.sup[static_cast<std::size_t>(tail.component)];
      const double ratio = tail.i2 / tail.bound_rhs;
      s.tail_ratio = std::max(s.tail_ratio.value_or(0.0), ratio);
    }
    for (std::size_t i = 0; i < spec.size(); ++i) {
      const int c = static_cast<int>(i);
      try {
        m.sup[i].gronwall = fit_gronwall(m.run.records, c);
      } catch (const DomainError&) {
      }
      if (!m.run.records.empty()) m.sup[i].threshold_crossing = threshold_monitor(m.run.records, spec, c).crossing;
    }
    if (progress) progress(k, m);
    result.members.push_back(std::move(m));
  }

  auto fit_family = [&](const std::string& family, int component, auto value) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& m : result.members) {
      if (m.failed || m.run.records.empty()) continue;
      const double v = value(m);
      if (v > 0.0) pts.emplace_back(m.epsilon, v);
    }
    FamilyFit f{family, component, std::nullopt};
    if (pts.size() >= 2) f.fit = fit_rate(pts);
    result.fits.push_back(f);
  };
  for (std::size_t i = 0; i < base.size(); ++i) {
    const int c = static_cast<int>(i);
    fit_family("w2_pv", c, [i](const SweepMember& m) { return m.sup[i].w2_pv; });
    fit_family("w2_center", c, [i](const SweepMember& m) { return m.sup[i].w2_center; });
    fit_family("center_gap", c, [i](const SweepMember& m) { return m.sup[i].center_gap; });
    fit_family("vel_gap", c, [i](const SweepMember& m) { return m.sup[i].vel_gap; });
  }
  fit_family("w1_total", -1, [](const SweepMember& m) { return m.sup_w1; });
  return result;
}

}  // namespace vortexlab
