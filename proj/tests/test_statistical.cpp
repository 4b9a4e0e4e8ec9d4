#include <doctest.h>

#include <cmath>

#include "slowspec/density.hpp"
#include "slowspec/eigensolver.hpp"
#include "slowspec/estimators.hpp"
#include "slowspec/reference.hpp"
#include "slowspec/simulate.hpp"
#include "test_support.hpp"

// Long-trajectory statistical checks (10^7 steps, fixed seeds).  These pin
// the estimator behavior at the benchmark scale; tolerances follow the
// stated targets even where the measured values show them to be
// unattainable for this system (see the failing assertions' messages).

using namespace slowspec;

namespace {

const PotentialSpec& doublewell() {
  static const PotentialSpec p = PotentialSpec::double_gaussian(-2, 2, 1, 1);
  return p;
}

const Trajectory& dw_traj() {
  static const Trajectory t = simulate(doublewell(), 2.0, 0.025, 10000000, 11);
  return t;
}

}  // namespace

TEST_CASE("long double-well histogram converges to the analytic density") {
  const Trajectory& t = dw_traj();
  const Vector edges = uniform_edges(-6, 6, 50);
  const DensityEstimate d = estimate_stationary_density(t, edges);
  double l1 = 0.0;
  for (Index i = 0; i < 50; ++i) {
    const double exact = testsupport::simpson(
        [&](double x) { return doublewell().stationary_density(x); },
        edges(i), edges(i + 1), 400);
    l1 += std::abs(d.masses()(i) - exact);
  }
  CHECK(l1 < 0.02);
  MESSAGE("L1(histogram, mu) = ", l1);

  // ergodic consistency: the first 10^6 frames are farther from mu on
  // average than the full trajectory
  Trajectory head = t;
  head.states.resize(1000001);
  const DensityEstimate dh = estimate_stationary_density(head, edges);
  double l1_head = 0.0;
  for (Index i = 0; i < 50; ++i) {
    const double exact = testsupport::simpson(
        [&](double x) { return doublewell().stationary_density(x); },
        edges(i), edges(i + 1), 400);
    l1_head += std::abs(dh.masses()(i) - exact);
  }
  CHECK(l1 < l1_head);
}

TEST_CASE("hermite-20 pencil from the long trajectory") {
  const Trajectory& t = dw_traj();
  const DensityEstimate mu =
      estimate_stationary_density(t, uniform_edges(-6, 6, 800));
  const BasisSet b = BasisSet::hermite(20);
  const CorrelationMatrices cm = estimate_correlation_matrices(t, b, mu, 1);
  const SpectralModel m = roothaan_hall_solve(cm.H, cm.S, b, t.dt);
  CHECK(m.eigenvalues()(0) >= 0.996);
  CHECK(m.eigenvalues()(0) <= 1.002);
  MESSAGE("lambda1 = ", m.eigenvalues()(0), ", lambda2 = ", m.eigenvalues()(1));

  const PencilErrorEstimate pe =
      pencil_eigenvalue_stderr(t, b, mu, 1, 1, EstimatorOptions{}, 200, 7);
  MESSAGE("lambda2 = ", pe.lambda, " +- ", pe.std_error,
          " (3 se = ", 3 * pe.std_error, ", block length ", pe.block_length,
          ")");
  // Benchmark target from the source figure.  The estimator carries a
  // systematic mu-hat discretization and noise bias of about -4e-5 that the
  // 10-frame-block bootstrap error (~1e-5) cannot absorb, so this stated
  // tolerance is expected to fail; kept as stated.
  CHECK(std::abs(pe.lambda - 0.998913) <= 3 * pe.std_error);

  // estimated overlap vs the identity: the stated 0.05 threshold is
  // dominated by the rare-tail variance of the highest Hermite functions
  // (entry (19,19) sits near 0.3 at N = 10^7 for any mu-hat binning);
  // kept as stated.
  const double s_dev =
      (cm.S - Matrix::Identity(20, 20)).cwiseAbs().maxCoeff();
  MESSAGE("max|S - I| = ", s_dev, " (low-order block: ",
          (cm.S.topLeftCorner(12, 12) - Matrix::Identity(12, 12))
              .cwiseAbs()
              .maxCoeff(),
          ")");
  CHECK(s_dev < 0.05);
}

TEST_CASE("rayleigh coefficient of the reference eigenfunction") {
  const Trajectory& t = dw_traj();
  const GridPropagator gp =
      build_grid_propagator(doublewell(), 0.025, Grid::uniform(-7, 7, 1401));
  const ReferenceSpectrum rs = reference_spectrum(gp, 2);

  RayleighOptions ro;
  ro.normalize = true;  // divide by the sampled <f, f>_mu-hat
  const RayleighEstimate est = rayleigh_coefficient_with_error(
      t, [&](double x) { return rs.weighted_eigenfunction(1, x); }, 1, ro,
      200, 7);
  MESSAGE("acf(r2) = ", est.value, " +- ", est.std_error);
  CHECK(std::abs(est.value - 0.998913) <= 3 * est.std_error);

  // Theorem bound: any normalized non-stationary test function stays below 1.
  CHECK(est.value < 1.0);
}
