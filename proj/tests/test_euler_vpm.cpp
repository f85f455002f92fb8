#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "vortexlab/euler_vpm.hpp"
#include "vortexlab/point_vortex.hpp"
#include "vortexlab/transport.hpp"

using namespace vortexlab;

namespace {

InitialDataSpec single_spec(double eps) {
  InitialDataSpec s;
  s.centers = {Vec2d(0.3, -0.2)};
  s.intensities = {1.0};
  s.epsilon = eps;
  s.support_radius = 0.25;
  s.separation = 1.0;
  s.p = 4.0;
  s.lambda = 10.0;
  return s;
}

ParticleCloud atoms(std::vector<Vec2d> pos, std::vector<double> gamma, double blob) {
  ParticleCloud c;
  c.positions = std::move(pos);
  c.circulations = std::move(gamma);
  for (std::size_t k = 0; k < c.circulations.size(); ++k) c.tags.push_back(static_cast<int>(k));
  c.components = static_cast<int>(c.circulations.size());
  c.blob_radius = blob;
  return c;
}

// Radial midpoint quadrature of int_0^1 f(r) 2 pi r dr.
template <typename F>
double radial_integral(F f) {
  const int n = 200000;
  double s = 0.0;
  for (int k = 0; k < n; ++k) {
    const double r = (k + 0.5) / n;
    s += f(r) * 2.0 * std::numbers::pi * r / n;
  }
  return s;
}

double brute_support_distance(const ParticleCloud& c) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < c.size(); ++a)
    for (std::size_t b = 0; b < a; ++b)
      if (c.tags[a] != c.tags[b]) best = std::min(best, (c.positions[a] - c.positions[b]).norm());
  return best;
}

}  // namespace

TEST_CASE("mother profile closed forms agree with quadrature") {
  CHECK(radial_integral([](double r) { return BumpProfile::value(r); }) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(radial_integral([](double r) { return r * r * BumpProfile::value(r); }) ==
        doctest::Approx(BumpProfile::second_moment()).epsilon(1e-9));
  CHECK(BumpProfile::second_moment() <= 1.0);
  for (double p : {3.0, 4.0, 6.5}) {
    const double pp = radial_integral([p](double r) { return std::pow(BumpProfile::value(r), p); });
    CHECK(std::pow(pp, 1.0 / p) == doctest::Approx(BumpProfile::lp_norm(p)).epsilon(1e-8));
  }
  CHECK(BumpProfile::value(1.0) == 0.0);
  CHECK(BumpProfile::value(1.5) == 0.0);
}

TEST_CASE("sampling a single compact bump") {
  const InitialDataSpec spec = single_spec(0.1);
  const double h = 0.1 / 24;
  const ParticleCloud c = sample_initial_cloud(spec, h, 2 * h);
  double total = 0.0;
  for (double g : c.circulations) {
    total += g;
    CHECK(g > 0.0);
  }
  CHECK(std::abs(total - 1.0) <= 1e-10);
  for (const auto& x : c.positions) CHECK((x - spec.centers[0]).norm() <= 0.1);
  CHECK(w2_to_dirac(c, 0, spec.centers[0]) <= 0.1);
  CHECK(c.pitch == h);
  CHECK(c.blob_radius == 2 * h);
}

TEST_CASE("sampled components keep their separation") {
  InitialDataSpec spec;
  spec.centers = {Vec2d(-1, 0), Vec2d(1, 0)};
  spec.intensities = {1.0, -0.5};
  spec.epsilon = 0.1;
  spec.support_radius = 0.2;
  spec.separation = 1.5;
  const ParticleCloud c = sample_initial_cloud(spec, 0.1 / 8, 0.025);
  CHECK(component_support_distance(c) >= 1.5);
  CHECK(c.intensity(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.intensity(1) == doctest::Approx(-0.5).epsilon(1e-12));
  for (std::size_t k = 0; k < c.size(); ++k) CHECK((c.circulations[k] > 0) == (c.tags[k] == 0));
}

TEST_CASE("discrete L^p norm scales as eps^(-3/2) for p = 4") {
  std::vector<double> le;
  std::vector<double> ln;
  for (double eps : {0.2, 0.1, 0.05}) {
    InitialDataSpec spec = single_spec(eps);
    const ParticleCloud c = sample_initial_cloud(spec, eps / 16, eps / 8);
    le.push_back(std::log(eps));
    ln.push_back(std::log(lp_norm_estimate(c, 4.0)));
  }
  const double slope1 = (ln[1] - ln[0]) / (le[1] - le[0]);
  const double slope2 = (ln[2] - ln[1]) / (le[2] - le[1]);
  CHECK(slope1 == doctest::Approx(-1.5).epsilon(0.05 / 1.5));
  CHECK(slope2 == doctest::Approx(-1.5).epsilon(0.05 / 1.5));
}

TEST_CASE("bump with tail spreads eps^beta of the mass out to R") {
  InitialDataSpec spec = single_spec(0.1);
  spec.profile = ProfileKind::bump_with_tail;
  spec.tail_exponent = 2.0;
  const double h = 0.1 / 16;
  const ParticleCloud c = sample_initial_cloud(spec, h, 2 * h);
  double outer = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double r = (c.positions[k] - spec.centers[0]).norm();
    CHECK(r <= spec.support_radius);
    total += c.circulations[k];
    if (r > spec.epsilon) outer += c.circulations[k];
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(outer == doctest::Approx(0.01).epsilon(0.1));
}

TEST_CASE("sampler rejects inconsistent requests") {
  InitialDataSpec spec = single_spec(0.1);
  CHECK_THROWS_AS(sample_initial_cloud(spec, 0.1 / 3, 0.01), ValidationError);
  spec.epsilon = 0.3;
  try {
    spec.validate();
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(e.field == "epsilon");
  }
  InitialDataSpec close;
  close.centers = {Vec2d(0, 0), Vec2d(1, 0)};
  close.intensities = {1.0, 1.0};
  close.epsilon = 0.1;
  close.support_radius = 0.25;
  close.separation = 0.9;
  CHECK_THROWS_AS(close.validate(), ValidationError);
}

TEST_CASE("vpm_rhs small cases") {
  VpmParams p;
  const auto one = vpm_rhs(atoms({Vec2d(0.1, 0.2)}, {2.0}, 0.05), p);
  CHECK(one[0].norm() == 0.0);
  const auto two = vpm_rhs(atoms({Vec2d(-0.5, 0), Vec2d(0.5, 0)}, {1.0, 1.0}, 0.0), p);
  CHECK(two[0].x() == 0.0);
  CHECK(two[0].y() == doctest::Approx(-1.0 / (2 * std::numbers::pi)).epsilon(1e-15));
  CHECK(two[1].y() == doctest::Approx(1.0 / (2 * std::numbers::pi)).epsilon(1e-15));
}

TEST_CASE("vpm_rhs on a sampled cloud matches the double loop") {
  InitialDataSpec spec;
  spec.centers = {Vec2d(-1, 0), Vec2d(1, 0)};
  spec.intensities = {1.0, 1.0};
  spec.epsilon = 0.16;
  spec.support_radius = 0.25;
  spec.separation = 1.5;
  const double h = 0.16 / 24;
  const ParticleCloud c = sample_initial_cloud(spec, h, 2 * h);
  REQUIRE(c.size() > 2000);
  for (std::size_t crossover : {std::size_t{0}, std::size_t{100000}}) {
    VpmParams p;
    p.crossover = crossover;
    const auto u = vpm_rhs(c, p);
    double err = 0.0;
    double scale = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
      const Vec2d ref = oracle::biot_savart_sum(c.positions, c.circulations, c.positions[k], c.blob_radius, k);
      err = std::max(err, (u[k] - ref).norm());
      scale = std::max(scale, ref.norm());
    }
    CHECK(err / scale <= (crossover == 0 ? 1e-3 : 1e-12));
  }
}

TEST_CASE("two-particle cloud steps exactly like the point vortices") {
  VpmParams p;
  p.kernel.deterministic = true;
  ParticleCloud c = atoms({Vec2d(-0.5, 0), Vec2d(0.5, 0)}, {1.0, 1.0}, 0.0);
  PointVortexState<double> s;
  s.positions = c.positions;
  s.intensities = {1.0, 1.0};
  for (int k = 0; k < 100; ++k) {
    c = vpm_step(c, 1e-3, p);
    s = pv_step<double>(s, 1e-3);
    REQUIRE(c.positions == s.positions);
  }
  const ParticleCloud lone = atoms({Vec2d(3, 4)}, {1.0}, 0.1);
  CHECK(vpm_step(lone, 0.5, p).positions == lone.positions);
}

TEST_CASE("stepping keeps circulations and conserves impulses") {
  InitialDataSpec spec;
  spec.centers = {Vec2d(-0.6, 0), Vec2d(0.6, 0)};
  spec.intensities = {1.0, 0.5};
  spec.epsilon = 0.2;
  spec.support_radius = 0.25;
  spec.separation = 0.7;
  const double h = 0.2 / 8;
  ParticleCloud c = sample_initial_cloud(spec, h, 2 * h);
  const auto gammas = c.circulations;
  const auto tags = c.tags;
  auto impulses = [](const ParticleCloud& cl) {
    Vec2d lin = Vec2d::Zero();
    double ang = 0.0;
    for (std::size_t k = 0; k < cl.size(); ++k) {
      lin += cl.circulations[k] * cl.positions[k];
      ang += cl.circulations[k] * cl.positions[k].squaredNorm();
    }
    return std::pair{lin, ang};
  };
  const auto [lin0, ang0] = impulses(c);
  VpmParams p;
  for (int k = 0; k < 1000; ++k) {
    const auto [lin_before, ang_before] = impulses(c);
    c = vpm_step(c, 1e-3, p);
    const auto [lin_after, ang_after] = impulses(c);
    REQUIRE((lin_after - lin_before).norm() <= 1e-10 * lin_before.norm());
  }
  const auto [lin1, ang1] = impulses(c);
  CHECK((lin1 - lin0).norm() <= 1e-8 * lin0.norm());
  CHECK(std::abs(ang1 - ang0) <= 1e-8 * std::abs(ang0));
  CHECK(c.circulations == gammas);
  CHECK(c.tags == tags);
  CHECK(c.t == doctest::Approx(1.0));
}

TEST_CASE("support distance") {
  const ParticleCloud two = atoms({Vec2d(0, 0), Vec2d(3, 0)}, {1.0, 1.0}, 0.0);
  CHECK(component_support_distance(two) == 3.0);
  CHECK(std::isinf(component_support_distance(atoms({Vec2d(0, 0)}, {1.0}, 0.0))));

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    ParticleCloud c;
    c.components = 3;
    for (int k = 0; k < 300; ++k) {
      const int tag = k % 3;
      c.positions.emplace_back(u(rng) + 0.7 * tag, u(rng));
      c.circulations.push_back(tag == 1 ? -0.01 : 0.01);
      c.tags.push_back(tag);
    }
    CHECK(component_support_distance(c) == brute_support_distance(c));
    CHECK(component_support_distance_lower_bound(c) <= component_support_distance(c));
  }
}

TEST_CASE("L^p estimate") {
  ParticleCloud c = atoms({Vec2d(0, 0)}, {0.01}, 0.0);
  c.pitch = 0.1;
  CHECK(lp_norm_estimate(c, 4.0) == doctest::Approx(std::pow(0.1, 0.5)).epsilon(1e-14));
  ParticleCloud doubled = c;
  doubled.circulations[0] *= 2.0;
  CHECK(lp_norm_estimate(doubled, 4.0) == doctest::Approx(2.0 * lp_norm_estimate(c, 4.0)).epsilon(1e-14));
  c.pitch.reset();
  CHECK_THROWS_AS(lp_norm_estimate(c, 4.0), DomainError);
}

TEST_CASE("integration stops only when supports close in") {
  VpmParams p;
  SUBCASE("single component runs to the horizon") {
    const ParticleCloud c = sample_initial_cloud(single_spec(0.1), 0.1 / 8, 0.025);
    SeparationStop stop{true, 0.5};
    const VpmRun run = vpm_integrate(c, 0.01, 0.2, 5, stop, p);
    CHECK_FALSE(run.report.separated);
    CHECK(run.report.t_final == doctest::Approx(0.2));
  }
  SUBCASE("far components keep their distance") {
    InitialDataSpec spec;
    spec.centers = {Vec2d(-1.5, 0), Vec2d(1.5, 0)};
    spec.intensities = {1.0, 1.0};
    spec.epsilon = 0.1;
    spec.support_radius = 0.25;
    spec.separation = 2.5;
    const ParticleCloud c = sample_initial_cloud(spec, 0.1 / 8, 0.025);
    SeparationStop stop{true, spec.separation / 2};
    std::vector<double> distances;
    const VpmRun run = vpm_integrate(c, 0.01, 0.5, 5, stop, p,
                                     [&](const ParticleCloud& cl) { distances.push_back(component_support_distance(cl)); });
    CHECK_FALSE(run.report.separated);
    // Each support drifts at most |F| t with |F| <= |a| / (2 pi d).
    const double drift = 1.0 / (2 * std::numbers::pi * 2.5) * 0.5;
    for (double d : distances) {
      CHECK(d >= spec.separation / 2);
      CHECK(d >= distances.front() - 2 * drift - 1e-12);
    }
  }
  SUBCASE("two dipoles aimed at each other stop early") {
    // Offset by one width so two same-sign vortices meet head on instead of
    // the dipoles swapping partners at their own width.
    const double a = 5.0;
    ParticleCloud c = atoms({Vec2d(-2, 0.5), Vec2d(-2, -0.5), Vec2d(2, 1.5), Vec2d(2, 0.5)}, {a, -a, -a, a}, 0.05);
    SeparationStop stop{true, 0.75};
    std::vector<double> distances;
    const VpmRun run = vpm_integrate(c, 0.01, 5.0, 1, stop, p,
                                     [&](const ParticleCloud& cl) { distances.push_back(component_support_distance(cl)); });
    REQUIRE(run.report.separated);
    CHECK(run.report.separation_time < 5.0);
    CHECK(run.report.distance < 0.75);
    CHECK(run.report.first != run.report.second);
    CHECK(distances.back() == run.report.distance);
    for (std::size_t k = 0; k + 1 < distances.size(); ++k) CHECK(distances[k] >= 0.75);
  }
}
