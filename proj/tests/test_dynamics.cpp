#include <doctest.h>

#include <cmath>
#include <limits>

#include "slowspec/potential.hpp"
#include "slowspec/simulate.hpp"
#include "test_support.hpp"

using namespace slowspec;

TEST_CASE("quartic potential energy") {
  const PotentialSpec p = PotentialSpec::quartic(3, -6, 3);
  CHECK(p.energy(0.0) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(p.energy(1.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(p.energy(-1.0) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("double-gaussian potential is symmetric for symmetric parameters") {
  const PotentialSpec p = PotentialSpec::double_gaussian(-2, 2, 1, 1);
  for (const double x : {0.0, 0.7, 1.9, 3.3, 5.5})
    CHECK(p.energy(x) == doctest::Approx(p.energy(-x)).epsilon(1e-13));
  CHECK(p.force(0.0) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("forces match central finite differences of the energy") {
  const PotentialSpec dg = PotentialSpec::double_gaussian(-2, 2, 1, 1);
  const PotentialSpec q = PotentialSpec::quartic(3, -6, 3);
  CHECK(q.force(1.0) == doctest::Approx(0.0).epsilon(1e-14));
  for (double x = -4.0; x <= 4.0; x += 0.25) {
    for (const PotentialSpec* p : {&dg, &q}) {
      const double fd = -testsupport::central_diff(
          [&](double t) { return p->energy(t); }, x);
      const double scale = std::max(1.0, std::abs(fd));
      CHECK(std::abs(p->force(x) - fd) / scale < 1e-6);
    }
  }
}

TEST_CASE("double-gaussian stationary density normalization and symmetry") {
  const PotentialSpec p = PotentialSpec::double_gaussian(-2, 2, 1, 1);
  const double total = testsupport::trapezoid(
      [&](double x) { return p.stationary_density(x); }, -12, 12, 24000);
  CHECK(std::abs(total - 1.0) < 1e-6);
  CHECK(p.stationary_density(2.0) ==
        doctest::Approx(p.stationary_density(-2.0)).epsilon(1e-14));
  // unequal widths normalize as well
  const PotentialSpec p2 = PotentialSpec::double_gaussian(-1, 3, 0.5, 1.5);
  const double total2 = testsupport::trapezoid(
      [&](double x) { return p2.stationary_density(x); }, -14, 14, 28000);
  CHECK(std::abs(total2 - 1.0) < 1e-6);
}

TEST_CASE("quartic normalization constant is stable under domain widening") {
  const PotentialSpec p = PotentialSpec::quartic(3, -6, 3);
  auto boltzmann = [&](double x) { return std::exp(-p.energy(x)); };
  const double z3 = testsupport::simpson(boltzmann, -3, 3, 6000);
  const double z5 = testsupport::simpson(boltzmann, -5, 5, 10000);
  CHECK(std::abs(z3 - z5) < 1e-8);
  CHECK(p.quartic_partition() == doctest::Approx(z3).epsilon(1e-9));
  // frozen oracle value
  CHECK(p.quartic_partition() == doctest::Approx(1.1207589356).epsilon(1e-8));
}

TEST_CASE("invalid potential parameters are rejected") {
  CHECK_THROWS_AS(PotentialSpec::double_gaussian(-2, 2, 0.0, 1), ConfigError);
  CHECK_THROWS_AS(PotentialSpec::quartic(-1, 0, 0), ConfigError);
  CHECK_THROWS_AS(PotentialSpec::quartic(3, -6, 3).energy(
                      std::numeric_limits<double>::infinity()),
                  ConfigError);
}

TEST_CASE("flat-potential increments are pure Brownian noise") {
  const PotentialSpec p = PotentialSpec::flat();
  const double dt = 0.01;
  const Index n = 1000000;
  SimulateOptions so;
  so.guard = 1e6;  // free diffusion wanders far beyond the default guard
  const Trajectory t = simulate(p, 0.0, dt, n, 7, so);
  REQUIRE(t.size() == n + 1);
  double sum = 0.0, sum2 = 0.0;
  for (Index k = 0; k < n; ++k) {
    const double inc = t.states[static_cast<std::size_t>(k + 1)] -
                       t.states[static_cast<std::size_t>(k)];
    sum += inc;
    sum2 += inc * inc;
  }
  const double mean = sum / static_cast<double>(n);
  const double var = sum2 / static_cast<double>(n) - mean * mean;
  CHECK(std::abs(mean) < 5.0 * std::sqrt(2.0 * dt / static_cast<double>(n)));
  CHECK(std::abs(var - 2.0 * dt) < 0.01 * 2.0 * dt);
}

TEST_CASE("simulation is deterministic per seed") {
  const PotentialSpec p = PotentialSpec::quartic(3, -6, 3);
  const Trajectory a = simulate(p, 1.0, 1e-3, 5000, 99);
  const Trajectory b = simulate(p, 1.0, 1e-3, 5000, 99);
  const Trajectory c = simulate(p, 1.0, 1e-3, 5000, 100);
  CHECK(a.states == b.states);
  CHECK(a.states != c.states);
}

TEST_CASE("quartic trajectory visits both wells") {
  const PotentialSpec p = PotentialSpec::quartic(3, -6, 3);
  const Trajectory t = simulate(p, 1.0, 1e-3, 200000, 3);
  int sign_changes = 0;
  for (Index k = 1; k < t.size(); ++k)
    if ((t.states[static_cast<std::size_t>(k)] > 0) !=
        (t.states[static_cast<std::size_t>(k - 1)] > 0))
      ++sign_changes;
  CHECK(sign_changes > 0);
}

TEST_CASE("stride records every stride-th frame with scaled dt") {
  const PotentialSpec p = PotentialSpec::flat();
  SimulateOptions so;
  so.stride = 10;
  const Trajectory t = simulate(p, 0.0, 0.01, 1000, 5, so);
  CHECK(t.size() == 101);
  CHECK(t.dt == doctest::Approx(0.1));
  const Trajectory full = simulate(p, 0.0, 0.01, 1000, 5);
  CHECK(t.states[10] == full.states[100]);  // same underlying noise stream
  CHECK_THROWS_AS(simulate(p, 0.0, 0.01, 1001, 5, so), ConfigError);
}

TEST_CASE("divergent trajectories abort with the failing step") {
  // Unstable Euler step: dt far beyond the stability limit.
  const PotentialSpec p = PotentialSpec::quartic(3, -6, 3);
  CHECK_THROWS_WITH_AS(simulate(p, 2.0, 1.0, 1000, 1),
                       doctest::Contains("diverged at step"), NumericError);
}
