#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "vortexlab/optimal_transport.hpp"

using namespace vortexlab;

TEST_CASE("single route costs mass times distance") {
  AtomicMeasure a({Vec2d(0, 0)}, {2.5});
  AtomicMeasure b({Vec2d(3, 4)}, {2.5});
  const auto [cost, plan] = w1_exact(a, b);
  CHECK(cost == doctest::Approx(12.5).epsilon(1e-15));
  REQUIRE(plan.routes.size() == 1);
  CHECK(plan.routes[0].mass == 2.5);
}

TEST_CASE("two half masses meet in the middle") {
  AtomicMeasure a({Vec2d(0, 0), Vec2d(1, 0)}, {0.5, 0.5});
  AtomicMeasure b({Vec2d(0.5, 0)}, {1.0});
  CHECK(w1_exact(a, b).first == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("mass mismatch and negative atoms are rejected") {
  AtomicMeasure a({Vec2d(0, 0)}, {1.0});
  AtomicMeasure b({Vec2d(1, 0)}, {1.1});
  CHECK_THROWS_AS(w1_exact(a, b), MassMismatchError);
  AtomicMeasure c({Vec2d(0, 0), Vec2d(1, 1)}, {2.0, -1.0});
  CHECK_THROWS_AS(w1_exact(c, a), DomainError);
}

TEST_CASE("zero-mass atoms are ignored") {
  AtomicMeasure a({Vec2d(0, 0), Vec2d(5, 5)}, {1.0, 0.0});
  AtomicMeasure b({Vec2d(1, 0)}, {1.0});
  CHECK(w1_exact(a, b).first == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("network simplex matches brute-force enumeration") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> total_units(1, 8);
  for (int trial = 0; trial < 200; ++trial) {
    const int total = total_units(rng);
    std::uniform_int_distribution<int> atoms(1, total);
    const auto a = oracle::random_unit_measure(rng, atoms(rng), total);
    const auto b = oracle::random_unit_measure(rng, atoms(rng), total);
    const auto [cost, plan] = w1_exact(a.measure(), b.measure());
    CHECK(std::abs(cost - oracle::brute_force_w1(a, b)) <= 1e-12);

    // The plan is a feasible coupling whose cost is the reported value.
    std::vector<double> rows(a.positions.size(), 0.0), cols(b.positions.size(), 0.0);
    double c = 0.0;
    for (const auto& r : plan.routes) {
      CHECK(r.mass >= 0.0);
      rows[r.source] += r.mass;
      cols[r.target] += r.mass;
      c += r.mass * (a.positions[r.source] - b.positions[r.target]).norm();
    }
    for (std::size_t k = 0; k < rows.size(); ++k) CHECK(std::abs(rows[k] - a.units[k] * a.unit) <= 1e-12);
    for (std::size_t k = 0; k < cols.size(); ++k) CHECK(std::abs(cols[k] - b.units[k] * b.unit) <= 1e-12);
    CHECK(std::abs(c - cost) <= 1e-12);
  }
}

TEST_CASE("metric axioms on random triples") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto random_measure = [&](int n) {
    AtomicMeasure m;
    std::vector<double> w(n);
    double s = 0.0;
    for (auto& x : w) s += (x = u(rng) + 0.05);
    for (int k = 0; k < n; ++k) m.add(Vec2d(u(rng), u(rng)), w[k] / s);
    return m;
  };
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_measure(1 + trial % 7);
    const auto b = random_measure(1 + (trial / 7) % 6);
    const auto c = random_measure(2 + trial % 5);
    const double ab = w1_exact(a, b).first;
    const double ba = w1_exact(b, a).first;
    CHECK(std::abs(ab - ba) <= 1e-12);
    CHECK(w1_exact(a, a).first == 0.0);
    CHECK(ab <= w1_exact(a, c).first + w1_exact(c, b).first + 1e-9);
  }
}

TEST_CASE("no two-route exchange improves the optimal plan") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = oracle::random_unit_measure(rng, 20, 40);
    const auto b = oracle::random_unit_measure(rng, 15, 40);
    const auto [cost, plan] = w1_exact(a.measure(), b.measure());
    for (const auto& r : plan.routes)
      for (const auto& s : plan.routes) {
        const double now = (a.positions[r.source] - b.positions[r.target]).norm() +
                           (a.positions[s.source] - b.positions[s.target]).norm();
        const double swapped = (a.positions[r.source] - b.positions[s.target]).norm() +
                               (a.positions[s.source] - b.positions[r.target]).norm();
        CHECK(now <= swapped + 1e-12);
      }
  }
}

TEST_CASE("signed W1 cancels shared atoms") {
  AtomicMeasure f({Vec2d(0, 0), Vec2d(1, 0)}, {1.0, -1.0});
  AtomicMeasure g({Vec2d(0, 1), Vec2d(1, 1)}, {1.0, -1.0});
  CHECK(w1_signed(f, g) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(w1_signed(f, f) == 0.0);

  const auto [plus, minus] = signed_difference(f, g);
  CHECK(plus.size() == 2);
  CHECK(minus.size() == 2);
  CHECK(plus.total_mass() == 2.0);

  // Atoms closer than the merge radius cancel instead of leaving dust.
  AtomicMeasure h({Vec2d(0.5, 0.5)}, {1.0});
  AtomicMeasure k({Vec2d(0.5 + 1e-14, 0.5)}, {1.0});
  CHECK(w1_signed(h, k) == 0.0);
  CHECK_THROWS_AS(w1_signed(h, AtomicMeasure({Vec2d(0, 0)}, {2.0})), MassMismatchError);
}

TEST_CASE("large inputs are coarsened and the pitch is reported") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  AtomicMeasure a;
  AtomicMeasure b;
  for (int k = 0; k < 600; ++k) a.add(Vec2d(u(rng), u(rng)), 1.0 / 600);
  for (int k = 0; k < 3; ++k) b.add(Vec2d(2.0 + k, 0.0), 1.0 / 3);
  W1Options opts;
  opts.atom_limit = 100;
  const W1Result coarse = w1_solve(a, b, opts);
  const W1Result exact = w1_solve(a, b);
  CHECK(coarse.coarsening.applied);
  CHECK(coarse.coarsening.pitch > 0.0);
  CHECK_FALSE(exact.coarsening.applied);
  CHECK(std::abs(coarse.distance - exact.distance) <= coarse.coarsening.displacement + 1e-12);
}
