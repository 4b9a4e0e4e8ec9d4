#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "slowspec/density.hpp"
#include "slowspec/io.hpp"
#include "slowspec/eigensolver.hpp"
#include "slowspec/estimators.hpp"
#include "slowspec/reference.hpp"
#include "slowspec/rng.hpp"
#include "slowspec/simulate.hpp"

using namespace slowspec;

namespace {

// deterministic uniforms for the randomized property suites
struct TestRng {
  std::uint64_t seed, k = 0;
  explicit TestRng(std::uint64_t s) : seed(s) {}
  double uniform(double lo, double hi) {
    const std::uint64_t bits = mix64(seed + 0x9E3779B97F4A7C15ull * (++k));
    return lo + (hi - lo) * static_cast<double>(bits >> 11) * 0x1.0p-53;
  }
  Index integer(Index lo, Index hi) {  // inclusive
    return lo + static_cast<Index>(
                    mix64(seed + 0x9E3779B97F4A7C15ull * (++k)) %
                    static_cast<std::uint64_t>(hi - lo + 1));
  }
};

const PotentialSpec& doublewell() {
  static const PotentialSpec p = PotentialSpec::double_gaussian(-2, 2, 1, 1);
  return p;
}

const GridPropagator& dw_propagator() {
  static const GridPropagator gp =
      build_grid_propagator(doublewell(), 0.025, Grid::uniform(-7, 7, 1401));
  return gp;
}

const ReferenceSpectrum& dw_reference() {
  static const ReferenceSpectrum rs = reference_spectrum(dw_propagator(), 40);
  return rs;
}

}  // namespace

TEST_CASE("variational bound holds for 50 randomized bases") {
  const GridPropagator& gp = dw_propagator();
  const ReferenceSpectrum& rs = dw_reference();
  TestRng rng(2024);

  int checked = 0;
  for (int trial = 0; trial < 25; ++trial) {
    // random gaussian basis
    const Index m = rng.integer(3, 15);
    Vector centers(m), sigmas(m);
    for (Index i = 0; i < m; ++i) {
      centers(i) = rng.uniform(-5.0, 5.0);
      sigmas(i) = rng.uniform(0.3, 2.0);
    }
    const BasisSet b = BasisSet::gaussian(centers, sigmas);
    const SpectralModel model = roothaan_hall_solve(
        quadrature_H(gp, b), b.overlap_analytic(), b, gp.tau());
    for (Index i = 0; i < model.size(); ++i)
      REQUIRE(model.eigenvalues()(i) <= rs.eigenvalues(i) + 1e-6);
    ++checked;
  }
  for (int trial = 0; trial < 25; ++trial) {
    // random partition (jittered uniform edges keep bins non-degenerate)
    const Index nb = rng.integer(5, 30);
    Vector edges(nb + 1);
    for (Index i = 0; i <= nb; ++i)
      edges(i) = -6.0 + 12.0 *
                            (static_cast<double>(i) +
                             0.8 * (rng.uniform(0.0, 1.0) - 0.5)) /
                            static_cast<double>(nb);
    edges(0) = -6.0;
    edges(nb) = 6.0;
    const BasisSet b = BasisSet::indicator_from_grid(edges, gp.grid(), gp.mu());
    const SpectralModel model = ritz_solve(quadrature_H(gp, b), b, gp.tau());
    for (Index i = 0; i < model.size(); ++i)
      REQUIRE(model.eigenvalues()(i) <= rs.eigenvalues(i) + 1e-6);
    ++checked;
  }
  CHECK(checked == 50);
}

TEST_CASE("msm/ritz equivalence: count-based spectra agree to 1e-10") {
  auto t_spectrum = [](const Matrix& transition,
                       const std::vector<Index>& visited) {
    Matrix t(static_cast<Index>(visited.size()),
             static_cast<Index>(visited.size()));
    for (std::size_t a = 0; a < visited.size(); ++a)
      for (std::size_t b = 0; b < visited.size(); ++b)
        t(static_cast<Index>(a), static_cast<Index>(b)) =
            transition(visited[a], visited[b]);
    Eigen::EigenSolver<Matrix> es(t);
    Vector re = es.eigenvalues().real();
    std::sort(re.data(), re.data() + re.size(), std::greater<double>());
    return re;
  };

  SUBCASE("randomized partitions of a quartic trajectory") {
    const Trajectory traj =
        simulate(PotentialSpec::quartic(3, -6, 3), 1.0, 1e-3, 100000, 23);
    TestRng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
      const Index nb = rng.integer(4, 25);
      Vector edges(nb + 1);
      for (Index i = 0; i <= nb; ++i)
        edges(i) = -2.5 + 5.0 *
                              (static_cast<double>(i) +
                               0.8 * (rng.uniform(0.0, 1.0) - 0.5)) /
                              static_cast<double>(nb);
      edges(0) = -2.5;
      edges(nb) = 2.5;
      const MsmMatrices msm = estimate_msm_transition_matrix(traj, edges, 10);
      const Index nv = static_cast<Index>(msm.visited.size());
      const Vector lam_h = msm_eigenvalues(msm, nv);
      const Vector lam_t = t_spectrum(msm.transition, msm.visited);
      REQUIRE(lam_h.size() == lam_t.size());
      for (Index i = 0; i < lam_h.size(); ++i)
        REQUIRE(std::abs(lam_h(i) - lam_t(i)) < 1e-10);
    }
  }

  SUBCASE("synthetic symmetric count matrices") {
    TestRng rng(13);
    for (int trial = 0; trial < 10; ++trial) {
      const Index nb = rng.integer(3, 12);
      Matrix counts(nb, nb);
      for (Index i = 0; i < nb; ++i)
        for (Index j = 0; j < nb; ++j) counts(i, j) = rng.uniform(0.0, 100.0);
      const Matrix cs = 0.5 * (counts + counts.transpose());
      const Vector d = cs.rowwise().sum();
      // indicator-basis H with pi from the same counts, h = c / sqrt(d d')
      const Matrix h = d.array().sqrt().inverse().matrix().asDiagonal() * cs *
                       d.array().sqrt().inverse().matrix().asDiagonal();
      Eigen::SelfAdjointEigenSolver<Matrix> eh(0.5 * (h + h.transpose()));
      Vector lam_h = eh.eigenvalues().reverse();
      const Matrix t = d.cwiseInverse().asDiagonal() * cs;
      Eigen::EigenSolver<Matrix> et(t);
      Vector lam_t = et.eigenvalues().real();
      std::sort(lam_t.data(), lam_t.data() + lam_t.size(),
                std::greater<double>());
      for (Index i = 0; i < nb; ++i)
        REQUIRE(std::abs(lam_h(i) - lam_t(i)) < 1e-10);
    }
  }
}

TEST_CASE("chapman-kolmogorov on the grid propagator") {
  const GridPropagator& gp = dw_propagator();
  const ReferenceSpectrum& rs1 = dw_reference();
  for (const Index m : {2, 3}) {
    const ReferenceSpectrum rsm = reference_spectrum(gp.power(m), 3);
    for (Index i = 0; i < 3; ++i)
      CHECK(std::abs(rsm.eigenvalues(i) -
                     std::pow(rs1.eigenvalues(i), static_cast<double>(m))) <
            1e-6);
  }
}

TEST_CASE("orthonormality of solver outputs and kernel detailed balance") {
  TestRng rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const Index m = rng.integer(3, 20);
    Matrix a(m, m), c(m, m);
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < m; ++j) {
        a(i, j) = rng.uniform(-1.0, 1.0);
        c(i, j) = rng.uniform(-1.0, 1.0);
      }
    const Matrix h = 0.5 * (a + a.transpose());
    const Matrix s =
        c * c.transpose() + 0.05 * Matrix::Identity(m, m);
    const SpectralModel rh =
        roothaan_hall_solve(h, s, BasisSet::hermite(m), 1.0);
    const Matrix gram = rh.coefficients().transpose() * s * rh.coefficients();
    REQUIRE((gram - Matrix::Identity(m, m)).cwiseAbs().maxCoeff() <= 1e-10);
    const SpectralModel rz = ritz_solve(h, BasisSet::hermite(m), 1.0);
    const Matrix gram2 = rz.coefficients().transpose() * rz.coefficients();
    REQUIRE((gram2 - Matrix::Identity(m, m)).cwiseAbs().maxCoeff() <= 1e-10);
  }

  CHECK(dw_propagator().detailed_balance_residual() < 1e-8);
  const GridPropagator quartic_gp = build_grid_propagator(
      PotentialSpec::quartic(3, -6, 3), 1e-3, Grid::uniform(-2.5, 2.5, 1001));
  CHECK(quartic_gp.detailed_balance_residual() < 1e-8);
}

TEST_CASE("estimator consistency: lag-0 identity, acf(1), bit-stable reruns") {
  const Trajectory traj =
      simulate(PotentialSpec::quartic(3, -6, 3), 1.0, 1e-3, 200000, 5);
  const DensityEstimate mu =
      estimate_stationary_density(traj, uniform_edges(-2.5, 2.5, 100));
  const BasisSet b = BasisSet::hermite(8);

  const Matrix h0 = estimate_H(traj, b, mu, 0);
  const Matrix s = estimate_S(traj, b, mu);
  CHECK((h0.array() == s.array()).all());

  const double acf1 = rayleigh_coefficient(traj, [](double) { return 1.0; }, 25);
  CHECK(std::abs(acf1 - 1.0) <= 1e-12);

  const Matrix h_a = estimate_H(traj, b, mu, 40);
  const Matrix h_b = estimate_H(traj, b, mu, 40);
  CHECK((h_a.array() == h_b.array()).all());

  const Trajectory rerun =
      simulate(PotentialSpec::quartic(3, -6, 3), 1.0, 1e-3, 200000, 5);
  CHECK(rerun.states == traj.states);

  std::ostringstream bytes_a, bytes_b;
  bytes_a << matrix_to_json(h_a).dump();
  bytes_b << matrix_to_json(estimate_H(rerun, b, mu, 40)).dump();
  CHECK(bytes_a.str() == bytes_b.str());
}
