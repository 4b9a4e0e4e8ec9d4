#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include "slowspec/density.hpp"
#include "slowspec/eigensolver.hpp"
#include "slowspec/estimators.hpp"
#include "slowspec/nonlinear.hpp"
#include "slowspec/reference.hpp"
#include "slowspec/rng.hpp"
#include "slowspec/simulate.hpp"

// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line per sub-check.  Targets and tolerances are fixed from the benchmark
// statement; several targets quoted from the source figures are not
// reproducible from the stated model (the suite reports the measured values
// next to them and fails honestly).

using namespace slowspec;

namespace {

struct Gate {
  int failures = 0;
  void check(const std::string& label, double value, double target,
             double tol) {
    const bool ok = std::abs(value - target) <= tol;
    std::printf("  [%s] %s: %.7g (target %.7g +- %.2g)\n",
                ok ? "PASS" : "FAIL", label.c_str(), value, target, tol);
    if (!ok) ++failures;
  }
  void require(const std::string& label, bool ok, const std::string& detail) {
    std::printf("  [%s] %s%s%s\n", ok ? "PASS" : "FAIL", label.c_str(),
                detail.empty() ? "" : ": ", detail.c_str());
    if (!ok) ++failures;
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

double elapsed_s(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

TEST_CASE("criterion 1: reference spectrum of the double well") {
  const auto t0 = std::chrono::steady_clock::now();
  Gate g;
  const ReferenceSpectrum& rs = dw_reference();
  g.check("lambda1", rs.eigenvalues(0), 1.0, 1e-8);
  g.check("lambda2", rs.eigenvalues(1), 0.998913, 1e-4);
  const double dt = elapsed_s(t0);
  g.require("runtime < 30 s", dt < 30.0, std::to_string(dt) + " s");
  CHECK(g.failures == 0);
}

TEST_CASE("criterion 2: indicator/MSM ritz with quadrature H") {
  Gate g;
  const GridPropagator& gp = dw_propagator();
  const BasisSet b = BasisSet::indicator_from_grid(
      Vector::LinSpaced(21, -6.0, 6.0), gp.grid(), gp.mu());
  const SpectralModel m = ritz_solve(quadrature_H(gp, b), b, 0.025);
  // The quadrature oracle yields 0.9977802 for this system (pinned in
  // test_reference.cpp); the quoted target 0.980384 is not reproducible
  // from the governing dynamics at tau = 0.025.
  g.check("lambda2 (20 characteristic functions)", m.eigenvalues()(1),
          0.980384, 5e-4);
  CHECK(g.failures == 0);
}

TEST_CASE("criterion 3: hermite ritz eigenvalue and eigenfunction") {
  Gate g;
  const GridPropagator& gp = dw_propagator();
  const ReferenceSpectrum& rs = dw_reference();
  const BasisSet b = BasisSet::hermite(20);
  const SpectralModel m = ritz_solve(quadrature_H(gp, b), b, 0.025);
  g.check("lambda2 (20 hermite functions)", m.eigenvalues()(1), 0.998913,
          1e-4);
  Vector phi2(rs.grid.n);
  for (Index i = 0; i < rs.grid.n; ++i) phi2(i) = m.eval(1, rs.grid.nodes(i));
  phi2 /= std::sqrt((phi2.array().square() * rs.grid.weights.array()).sum());
  if ((phi2.array() * rs.phi.col(1).array() * rs.grid.weights.array()).sum() <
      0.0)
    phi2 = -phi2;
  const double l2 = std::sqrt(
      ((phi2 - rs.phi.col(1)).array().square() * rs.grid.weights.array())
          .sum());
  g.require("L2(phi2 - reference) < 0.01", l2 < 0.01, std::to_string(l2));
  CHECK(g.failures == 0);
}

TEST_CASE("criterion 4: gaussian roothaan-hall with analytic overlap") {
  Gate g;
  const GridPropagator& gp = dw_propagator();
  const BasisSet b = BasisSet::gaussian(Vector::LinSpaced(11, -5.0, 5.0),
                                        Vector::Constant(11, 1.0));
  const SpectralModel m = roothaan_hall_solve(quadrature_H(gp, b),
                                              b.overlap_analytic(), b, 0.025);
  // Measured oracle value 0.9989185 (pinned in test_reference.cpp); the
  // quoted target 0.995507 is not reproducible from the governing dynamics
  // at tau = 0.025.
  g.check("lambda2 (11 gaussians)", m.eigenvalues()(1), 0.995507, 5e-4);
  CHECK(g.failures == 0);
}

TEST_CASE("criterion 5: nonlinear ansatz optimization") {
  Gate g;
  const OptimizeResult res =
      optimize_ansatz(doublewell(), 0.025, Grid::uniform(-7, 7, 1401),
                      {0.2, 3.0}, {0.2, 3.0});
  // The benchmark surface peaks at (2.05, 0.99); no local maximum exists
  // near the quoted (1, 0.8) for the governing dynamics.
  bool near_quoted = false;
  for (const ScanPoint& m : res.local_maxima)
    if (std::abs(m.y - 1.0) <= 0.1 && std::abs(m.s - 0.8) <= 0.1)
      near_quoted = true;
  g.require("local maximum at (1, 0.8) +- 0.1", near_quoted,
            "best maximum at (" + std::to_string(res.y) + ", " +
                std::to_string(res.s) + ")");
  g.require("rayleigh value respects the reference bound",
            res.rayleigh <= dw_reference().eigenvalues(1) + 1e-5,
            std::to_string(res.rayleigh));
  CHECK(g.failures == 0);
}

TEST_CASE("criterion 6: quartic trajectory pipeline") {
  const auto t0 = std::chrono::steady_clock::now();
  Gate g;
  const PotentialSpec q = PotentialSpec::quartic(3, -6, 3);
  const double dt = 1e-3;
  const Trajectory traj = simulate(q, 1.0, dt, 10000000, 42);
  Index sign_changes = 0;
  for (Index k = 1; k < traj.size(); ++k)
    if ((traj.states[static_cast<std::size_t>(k)] > 0) !=
        (traj.states[static_cast<std::size_t>(k - 1)] > 0))
      ++sign_changes;
  g.require("simulation completes and visits both wells", sign_changes > 0,
            std::to_string(sign_changes) + " sign changes");
  const DensityEstimate mu =
      estimate_stationary_density(traj, uniform_edges(-2.5, 2.5, 100));

  // 13-gaussian basis with component variances 1 / 0.5
  Vector centers(13), sigmas(13);
  centers << -2, -1.5, -1.2, -1, -0.8, -0.5, 0, 0.5, 0.8, 1, 1.2, 1.5, 2;
  for (Index i = 0; i < 13; ++i) {
    const double c = centers(i);
    const bool wide = c == -2 || c == -1.5 || c == 0 || c == 1.5 || c == 2;
    sigmas(i) = wide ? 1.0 : std::sqrt(0.5);
  }
  const BasisSet b = BasisSet::gaussian(centers, sigmas);

  const GridPropagator gp =
      build_grid_propagator(q, dt, Grid::uniform(-2.5, 2.5, 1001));
  const ReferenceSpectrum rs = reference_spectrum(gp, 3);
  const double t2_ref = implied_timescale(rs.eigenvalues(1), dt).value;
  std::printf("  reference t2 = %.4f\n", t2_ref);

  for (const Index lag : {10, 20, 50, 100}) {
    const CorrelationMatrices cm =
        estimate_correlation_matrices(traj, b, mu, lag);
    const SpectralModel m =
        roothaan_hall_solve(cm.H, cm.S, b, dt * static_cast<double>(lag));
    const double t2_rh =
        implied_timescale(m.eigenvalues()(1), m.lag_time()).value;

    const MsmMatrices msm = estimate_msm_transition_matrix(
        traj, uniform_edges(-2.5, 2.5, 100), lag);
    const Vector ev = msm_eigenvalues(msm, 2);
    const double t2_msm =
        implied_timescale(ev(1), dt * static_cast<double>(lag)).value;

    const double mutual =
        std::abs(t2_rh - t2_msm) / std::min(t2_rh, t2_msm);
    const double rh_vs_ref = std::abs(t2_rh - t2_ref) / t2_ref;
    const double msm_vs_ref = std::abs(t2_msm - t2_ref) / t2_ref;
    g.require(
        "lag " + std::to_string(lag) + ": RH and MSM t2 agree within 15%",
        mutual <= 0.15,
        "t2_RH " + std::to_string(t2_rh) + ", t2_MSM " + std::to_string(t2_msm));
    g.require("lag " + std::to_string(lag) + ": RH t2 within 20% of reference",
              rh_vs_ref <= 0.20, std::to_string(100 * rh_vs_ref) + "%");
    g.require("lag " + std::to_string(lag) + ": MSM t2 within 20% of reference",
              msm_vs_ref <= 0.20, std::to_string(100 * msm_vs_ref) + "%");
  }
  const double wall = elapsed_s(t0);
  g.require("runtime < 2 min", wall < 120.0, std::to_string(wall) + " s");
  CHECK(g.failures == 0);
}

TEST_CASE("criterion 7: property suites") {
  Gate g;
  const GridPropagator& gp = dw_propagator();
  const ReferenceSpectrum& rs = dw_reference();

  {  // variational bound over 50 randomized bases
    auto t0 = std::chrono::steady_clock::now();
    double worst = -1.0;
    std::uint64_t k = 0;
    auto uniform = [&k](double lo, double hi) {
      return lo + (hi - lo) *
                      static_cast<double>(mix64(0xACCE5 + 0x9E3779B97F4A7C15ull *
                                                              (++k)) >>
                                          11) *
                      0x1.0p-53;
    };
    for (int trial = 0; trial < 50; ++trial) {
      SpectralModel model = [&] {
        if (trial % 2 == 0) {
          const Index m = 3 + static_cast<Index>(uniform(0, 12.999));
          Vector c(m), s(m);
          for (Index i = 0; i < m; ++i) {
            c(i) = uniform(-5, 5);
            s(i) = uniform(0.3, 2.0);
          }
          const BasisSet basis = BasisSet::gaussian(c, s);
          return roothaan_hall_solve(quadrature_H(gp, basis),
                                     basis.overlap_analytic(), basis, 0.025);
        }
        const Index nb = 5 + static_cast<Index>(uniform(0, 24.999));
        Vector edges(nb + 1);
        for (Index i = 0; i <= nb; ++i)
          edges(i) = -6.0 + 12.0 *
                                (static_cast<double>(i) +
                                 0.8 * (uniform(0.0, 1.0) - 0.5)) /
                                static_cast<double>(nb);
        edges(0) = -6.0;
        edges(nb) = 6.0;
        const BasisSet basis =
            BasisSet::indicator_from_grid(edges, gp.grid(), gp.mu());
        return ritz_solve(quadrature_H(gp, basis), basis, 0.025);
      }();
      for (Index i = 0; i < model.size(); ++i)
        worst = std::max(worst, model.eigenvalues()(i) - rs.eigenvalues(i));
    }
    g.require("variational bound over 50 random bases (<= ref + 1e-6)",
              worst <= 1e-6, "worst excess " + std::to_string(worst));
    g.require("variational bound suite < 60 s",
              elapsed_s(t0) < 60.0, "");
  }

  {  // msm/ritz equivalence
    auto t0 = std::chrono::steady_clock::now();
    const Trajectory traj =
        simulate(PotentialSpec::quartic(3, -6, 3), 1.0, 1e-3, 100000, 23);
    double worst = 0.0;
    std::uint64_t k = 1000;
    auto uniform = [&k](double lo, double hi) {
      return lo + (hi - lo) *
                      static_cast<double>(mix64(0xACCE5 + 0x9E3779B97F4A7C15ull *
                                                              (++k)) >>
                                          11) *
                      0x1.0p-53;
    };
    for (int trial = 0; trial < 10; ++trial) {
      const Index nb = 4 + static_cast<Index>(uniform(0, 20.999));
      Vector edges(nb + 1);
      for (Index i = 0; i <= nb; ++i)
        edges(i) = -2.5 + 5.0 *
                              (static_cast<double>(i) +
                               0.8 * (uniform(0.0, 1.0) - 0.5)) /
                              static_cast<double>(nb);
      edges(0) = -2.5;
      edges(nb) = 2.5;
      const MsmMatrices msm = estimate_msm_transition_matrix(traj, edges, 10);
      const Index nv = static_cast<Index>(msm.visited.size());
      Matrix t(nv, nv);
      for (Index a = 0; a < nv; ++a)
        for (Index c2 = 0; c2 < nv; ++c2)
          t(a, c2) = msm.transition(msm.visited[static_cast<std::size_t>(a)],
                                    msm.visited[static_cast<std::size_t>(c2)]);
      Eigen::EigenSolver<Matrix> es(t);
      Vector lam_t = es.eigenvalues().real();
      std::sort(lam_t.data(), lam_t.data() + lam_t.size(),
                std::greater<double>());
      const Vector lam_h = msm_eigenvalues(msm, nv);
      for (Index i = 0; i < nv; ++i)
        worst = std::max(worst, std::abs(lam_h(i) - lam_t(i)));
    }
    g.require("msm/ritz equivalence to 1e-10", worst <= 1e-10,
              "worst " + std::to_string(worst));
    g.require("msm/ritz suite < 60 s", elapsed_s(t0) < 60.0, "");
  }

  {  // chapman-kolmogorov
    auto t0 = std::chrono::steady_clock::now();
    const ReferenceSpectrum rs2 = reference_spectrum(gp.power(2), 3);
    double worst = 0.0;
    for (Index i = 0; i < 3; ++i)
      worst = std::max(worst,
                       std::abs(rs2.eigenvalues(i) -
                                rs.eigenvalues(i) * rs.eigenvalues(i)));
    g.require("chapman-kolmogorov lambda_i(2 tau) = lambda_i(tau)^2 +- 1e-6",
              worst <= 1e-6, "worst " + std::to_string(worst));
    g.require("chapman-kolmogorov suite < 60 s", elapsed_s(t0) < 60.0, "");
  }

  {  // orthonormality + detailed balance
    auto t0 = std::chrono::steady_clock::now();
    const BasisSet b = BasisSet::gaussian(Vector::LinSpaced(11, -5.0, 5.0),
                                          Vector::Constant(11, 1.0));
    const Matrix s = b.overlap_analytic();
    const SpectralModel m =
        roothaan_hall_solve(quadrature_H(gp, b), s, b, 0.025);
    const double gram_dev =
        (m.coefficients().transpose() * s * m.coefficients() -
         Matrix::Identity(11, 11))
            .cwiseAbs()
            .maxCoeff();
    g.require("solver output S-orthonormal to 1e-10", gram_dev <= 1e-10,
              "deviation " + std::to_string(gram_dev));
    const double db = gp.detailed_balance_residual();
    g.require("detailed-balance residual < 1e-8", db < 1e-8,
              std::to_string(db));
    g.require("orthonormality suite < 60 s", elapsed_s(t0) < 60.0, "");
  }

  {  // estimator consistency
    auto t0 = std::chrono::steady_clock::now();
    const Trajectory traj =
        simulate(PotentialSpec::quartic(3, -6, 3), 1.0, 1e-3, 200000, 5);
    const DensityEstimate mu =
        estimate_stationary_density(traj, uniform_edges(-2.5, 2.5, 100));
    const BasisSet b = BasisSet::hermite(8);
    const Matrix h0 = estimate_H(traj, b, mu, 0);
    const Matrix s0 = estimate_S(traj, b, mu);
    g.require("lag-0 H equals S exactly", (h0.array() == s0.array()).all(),
              "");
    const double acf1 =
        rayleigh_coefficient(traj, [](double) { return 1.0; }, 10);
    g.require("acf(1) = 1 +- 1e-12", std::abs(acf1 - 1.0) <= 1e-12,
              std::to_string(acf1));
    const Matrix h_a = estimate_H(traj, b, mu, 40);
    const Matrix h_b = estimate_H(traj, b, mu, 40);
    g.require("re-runs byte-identical", (h_a.array() == h_b.array()).all(),
              "");
    g.require("estimator consistency suite < 60 s", elapsed_s(t0) < 60.0, "");
  }

  CHECK(g.failures == 0);
}
