#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "vortexlab/experiments.hpp"
#include "vortexlab/transport.hpp"

using namespace vortexlab;

namespace {

InitialDataSpec pair_spec(double eps) {
  InitialDataSpec s;
  s.centers = {Vec2d(-1, 0), Vec2d(1, 0)};
  s.intensities = {1.0, 1.0};
  s.epsilon = eps;
  s.support_radius = 0.25;
  s.separation = 1.5;
  s.p = 4.0;
  return s;
}

NumericsConfig coarse(double horizon) {
  NumericsConfig n;
  n.dt = 0.01;
  n.horizon = horizon;
  n.particles_per_core = 8;
  n.cadence = 0.1;
  n.deterministic = true;
  return n;
}

DiagnosticsRecord synthetic(double t, double w2_center, double m_2R) {
  DiagnosticsRecord r;
  r.t = t;
  ComponentDiagnostics d;
  d.w2_center = w2_center;
  d.m_2R = m_2R;
  r.components.push_back(d);
  return r;
}

void check_record_chains(const InitialDataSpec& spec, const DiagnosticsRecord& r) {
  double chain = 0.0;
  for (std::size_t i = 0; i < r.components.size(); ++i) {
    const auto& d = r.components[i];
    CHECK(d.w2_pv <= d.w2_center + d.center_gap);
    const double R = spec.support_radius;
    CHECK(d.m_R <= d.w2_center * d.w2_center / (R * R));
    CHECK(d.m_2R <= d.w2_center * d.w2_center / (4 * R * R));
    CHECK(std::isfinite(d.vel_gap));
    chain += std::abs(spec.intensities[i]) * d.w2_pv;
  }
  CHECK(r.w1_total <= chain);
}

}  // namespace

TEST_CASE("a lone component does not move its point vortex") {
  InitialDataSpec spec;
  spec.centers = {Vec2d(0.2, 0.1)};
  spec.intensities = {1.0};
  spec.epsilon = 0.1;
  spec.support_radius = 0.25;
  spec.separation = 1.0;
  const PairingRun run = run_pairing(spec, coarse(1.0));
  REQUIRE(run.records.size() >= 2);
  CHECK(run.t_run == doctest::Approx(1.0));
  for (const auto& r : run.records) {
    const auto& d = r.components[0];
    CHECK(d.Y == spec.centers[0]);
    CHECK(d.center_gap <= 1e-6);
    CHECK(std::abs(d.w2_pv - d.w2_center) <= 1e-6);
    CHECK(d.vel_gap == 0.0);
  }
}

TEST_CASE("atomic components coincide with the point vortices") {
  ParticleCloud cloud;
  cloud.positions = {Vec2d(-0.5, 0), Vec2d(0.5, 0.2)};
  cloud.circulations = {1.0, 0.5};
  cloud.tags = {0, 1};
  cloud.components = 2;
  PointVortexState<double> pv;
  pv.positions = cloud.positions;
  pv.intensities = cloud.circulations;
  InitialDataSpec spec;
  spec.centers = cloud.positions;
  spec.intensities = cloud.circulations;
  spec.support_radius = 0.1;
  spec.separation = 0.5;
  spec.epsilon = 0.05;
  KernelParams k;
  VpmParams vp;
  for (int step = 0; step < 50; ++step) {
    const DiagnosticsRecord r = make_record(spec, cloud, pv, k);
    for (const auto& d : r.components) {
      CHECK(d.w2_pv == 0.0);
      CHECK(d.w2_center == 0.0);
      CHECK(d.center_gap == 0.0);
      CHECK(d.vel_gap <= 1e-15);
    }
    CHECK(r.w1_total <= 1e-15);
    cloud = vpm_step(cloud, 0.01, vp);
    pv = pv_step<double>(pv, 0.01);
  }
}

TEST_CASE("every record of a two-bump run satisfies the metric chains") {
  const InitialDataSpec spec = pair_spec(0.05);
  NumericsConfig n = coarse(2.0);
  n.tail_monitor = true;
  const PairingRun run = run_pairing(spec, n);
  CHECK_FALSE(run.failure.has_value());
  CHECK(run.t_run == doctest::Approx(2.0));
  REQUIRE(run.records.size() == 21);
  for (const auto& r : run.records) check_record_chains(spec, r);
  CHECK(run.records.front().components[0].m_2R == 0.0);
  CHECK(run.records.front().components[0].m_R == 0.0);
  CHECK_FALSE(run.tail.empty());
  for (const auto& s : run.tail) CHECK(s.i2 <= 10.0 * s.bound_rhs);
}

TEST_CASE("point-vortex offsets start Y away from the center") {
  InitialDataSpec spec = pair_spec(0.1);
  spec.pv_offsets = {Vec2d(0, 0.5), Vec2d(0, -0.5)};
  const PairingRun run = run_pairing(spec, coarse(0.2));
  const auto& d = run.records.front().components[0];
  CHECK(d.center_gap == doctest::Approx(0.05).epsilon(1e-6));
}

TEST_CASE("fit_rate") {
  std::vector<std::pair<double, double>> exact;
  std::vector<std::pair<double, double>> square;
  for (double e : {0.16, 0.08, 0.04, 0.02}) {
    exact.emplace_back(e, 3 * e);
    square.emplace_back(e, e * e);
  }
  const RateFit f = fit_rate(exact);
  CHECK(f.slope == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(f.residual <= 1e-12);
  CHECK(fit_rate(square).slope == doctest::Approx(2.0).epsilon(1e-12));

  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> noise(-0.05, 0.05);
  std::vector<std::pair<double, double>> noisy;
  for (double e = 0.2; e > 0.005; e *= 0.8) noisy.emplace_back(e, 2 * e * (1 + noise(rng)));
  const RateFit g = fit_rate(noisy);
  CHECK(g.slope >= 0.9);
  CHECK(g.slope <= 1.1);
  CHECK(g.residual > 0.0);

  CHECK_THROWS_AS(fit_rate({{0.1, 1.0}}), DegenerateInputError);
  CHECK_THROWS_AS(fit_rate({{0.1, 1.0}, {0.1, 2.0}}), DegenerateInputError);
  CHECK_THROWS_AS(fit_rate({{0.1, 1.0}, {0.05, 0.0}}), DomainError);
}

TEST_CASE("fit_gronwall") {
  std::vector<DiagnosticsRecord> grow;
  std::vector<DiagnosticsRecord> flat;
  for (int k = 0; k <= 20; ++k) {
    const double t = 0.1 * k;
    grow.push_back(synthetic(t, 0.05 * std::exp(0.7 * t), 0.0));
    flat.push_back(synthetic(t, 0.05, 0.0));
  }
  const GronwallFit g = fit_gronwall(grow, 0);
  CHECK(g.C == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(g.prefactor == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(g.residual <= 1e-12);
  CHECK(std::abs(fit_gronwall(flat, 0).C) <= 1e-14);
  CHECK_THROWS_AS(fit_gronwall({grow[0]}, 0), DegenerateInputError);
}

TEST_CASE("growth fit is stable under halving dt") {
  const InitialDataSpec spec = pair_spec(0.1);
  NumericsConfig a = coarse(1.0);
  a.dt = 0.02;
  NumericsConfig b = a;
  b.dt = 0.01;
  const double ca = fit_gronwall(run_pairing(spec, a).records, 0).C;
  const double cb = fit_gronwall(run_pairing(spec, b).records, 0).C;
  CHECK(std::isfinite(ca));
  CHECK(std::abs(ca - cb) <= 0.2 * std::max(std::abs(ca), std::abs(cb)) + 1e-3);
}

TEST_CASE("threshold monitor") {
  InitialDataSpec spec = pair_spec(0.1);
  std::vector<DiagnosticsRecord> records;
  const double alpha = spec.p * spec.effective_gamma() / (spec.p - 2);
  const double level = std::pow(0.1, alpha);
  for (int k = 0; k < 10; ++k) records.push_back(synthetic(0.1 * k, 0.02, k >= 6 ? 2 * level : 0.0));
  const ThresholdMonitor m = threshold_monitor(records, spec, 0);
  CHECK(m.alpha == doctest::Approx(3.0));
  CHECK(m.alpha > 2.0);
  CHECK(m.level == doctest::Approx(level));
  REQUIRE(m.crossing.has_value());
  CHECK(*m.crossing == doctest::Approx(0.6));
  CHECK(m.chebyshev_ceiling[0] == doctest::Approx(0.02 * 0.02 / (0.5 * 0.5)));

  const PairingRun run = run_pairing(spec, coarse(1.0));
  const ThresholdMonitor real = threshold_monitor(run.records, spec, 0);
  CHECK_FALSE(real.crossing.has_value());
  CHECK(real.m_2R.front() == 0.0);
}

TEST_CASE("sweeps") {
  const InitialDataSpec spec = pair_spec(0.16);
  NumericsConfig n = coarse(0.5);
  SUBCASE("single eps carries sup values but no fits") {
    const SweepResult s = run_sweep(spec, {0.1}, n);
    REQUIRE(s.members.size() == 1);
    CHECK(s.members[0].sup[0].w2_pv > 0.0);
    for (const auto& f : s.fits) CHECK_FALSE(f.fit.has_value());
  }
  SUBCASE("distances shrink with eps and the run repeats bit for bit") {
    const SweepResult a = run_sweep(spec, {0.16, 0.08}, n);
    const SweepResult b = run_sweep(spec, {0.16, 0.08}, n);
    REQUIRE(a.members.size() == 2);
    for (int i = 0; i < 2; ++i) {
      CHECK(a.members[1].sup[i].w2_pv <= 1.25 * a.members[0].sup[i].w2_pv);
      CHECK(a.members[1].sup[i].center_gap <= 1.25 * a.members[0].sup[i].center_gap + 1e-12);
    }
    for (std::size_t k = 0; k < 2; ++k) CHECK(a.members[k].run.records == b.members[k].run.records);
    const FamilyFit* f = a.find("w2_pv", 0);
    REQUIRE(f != nullptr);
    REQUIRE(f->fit.has_value());
    CHECK(f->fit->slope > 0.5);
  }
  SUBCASE("bad eps lists are rejected") {
    CHECK_THROWS_AS(run_sweep(spec, {0.08, 0.16}, n), ValidationError);
    CHECK_THROWS_AS(run_sweep(spec, {0.5}, n), ValidationError);
    CHECK_THROWS_AS(run_sweep(spec, {}, n), ValidationError);
  }
}
