#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "slowspec/eigensolver.hpp"

using namespace slowspec;

namespace {

BasisSet hermite_basis(Index n) { return BasisSet::hermite(n); }

Matrix random_spd(Index n, unsigned seed) {
  std::srand(seed);
  const Matrix a = Matrix::Random(n, n);
  return a * a.transpose() + 0.1 * Matrix::Identity(n, n);
}

}  // namespace

TEST_CASE("ritz: identity and diagonal inputs") {
  const Matrix id = Matrix::Identity(5, 5);
  const SpectralModel m = ritz_solve(id, hermite_basis(5), 0.1);
  CHECK((m.eigenvalues().array() == 1.0).all());

  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 0.98;
  const SpectralModel m2 = ritz_solve(d, hermite_basis(2), 0.1);
  CHECK(m2.eigenvalues()(0) == doctest::Approx(1.0));
  CHECK(m2.eigenvalues()(1) == doctest::Approx(0.98));
  CHECK(m2.coefficients().isIdentity(1e-14));
}

TEST_CASE("ritz rejects non-square and asymmetric inputs") {
  CHECK_THROWS_AS(ritz_solve(Matrix::Zero(2, 3), hermite_basis(2), 1.0),
                  ConfigError);
  Matrix bad = Matrix::Identity(3, 3);
  bad(0, 1) = 0.5;  // far beyond the 1e-8 symmetry tolerance
  CHECK_THROWS_AS(ritz_solve(bad, hermite_basis(3), 1.0), ConfigError);
}

TEST_CASE("roothaan-hall reduces to ritz for S = I") {
  const Matrix h = random_spd(6, 42);
  const Matrix hs = 0.5 * (h + h.transpose());
  const SpectralModel a = ritz_solve(hs, hermite_basis(6), 1.0);
  const SpectralModel b = roothaan_hall_solve(hs, Matrix::Identity(6, 6),
                                              hermite_basis(6), 1.0);
  CHECK((a.eigenvalues() - b.eigenvalues()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((a.coefficients() - b.coefficients()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("roothaan-hall: H = S gives unit eigenvalues and S-orthonormality") {
  const Matrix s = random_spd(7, 11);
  const SpectralModel m = roothaan_hall_solve(s, s, hermite_basis(7), 1.0);
  CHECK((m.eigenvalues().array() - 1.0).abs().maxCoeff() < 1e-12);
  const Matrix gram =
      m.coefficients().transpose() * s * m.coefficients();
  CHECK((gram - Matrix::Identity(7, 7)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(m.info().pencil_residual <= 1e-9 * s.cwiseAbs().maxCoeff());
}

TEST_CASE("roothaan-hall truncates a rank-deficient overlap") {
  // Rank-2 overlap in a 4-dimensional basis.
  Matrix v = Matrix::Zero(4, 2);
  v << 1, 0, 0, 1, 1, 0, 0, 1;
  const Matrix s = v * v.transpose();
  Matrix h = Matrix::Zero(4, 4);
  h(0, 0) = h(2, 2) = 2.0;
  h(1, 1) = h(3, 3) = 1.0;
  const SpectralModel m = roothaan_hall_solve(h, s, hermite_basis(4), 1.0);
  CHECK(m.info().truncated);
  CHECK(m.info().retained_rank == 2);
  CHECK(m.size() == 2);
  CHECK(m.eigenvalues()(0) == doctest::Approx(1.0));  // 2/2 in the kept space
  CHECK(m.eigenvalues()(1) == doctest::Approx(0.5));

  CHECK_THROWS_AS(roothaan_hall_solve(h, Matrix::Zero(4, 4), hermite_basis(4),
                                      1.0),
                  NumericError);
}

TEST_CASE("implied timescales") {
  CHECK(implied_timescale(std::exp(-1.0), 1.0).value == doctest::Approx(1.0));
  const Timescale at_one = implied_timescale(1.0, 0.5);
  CHECK_FALSE(at_one.finite);
  CHECK(std::isinf(at_one.value));
  CHECK_THROWS_AS(implied_timescale(-0.2, 1.0), NumericError);
  CHECK_THROWS_AS(implied_timescale(0.0, 1.0), NumericError);
  // arithmetic on the benchmark value
  const Timescale t2 = implied_timescale(0.998913, 0.025);
  CHECK(std::abs(t2.value - 22.99) < 0.01);
}

TEST_CASE("eval_model: identity coefficients reproduce the basis") {
  const BasisSet b = hermite_basis(4);
  const SpectralModel m = ritz_solve(Matrix::Identity(4, 4), b, 1.0);
  for (const double x : {-1.3, 0.2, 2.4}) {
    const Vector chi = b.eval(x);
    for (Index i = 0; i < 4; ++i)
      CHECK(m.eval(i, x) == doctest::Approx(chi(i)).epsilon(1e-14));
  }
}

TEST_CASE("weighted model mode fails outside the density support") {
  Matrix d = Matrix::Identity(2, 2);
  Vector edges(3), pi(2);
  edges << 0, 1, 2;
  pi << 0.5, 0.5;
  const SpectralModel m =
      ritz_solve(d, BasisSet::indicator(edges, pi, PiSource::Exact), 1.0);
  CHECK_THROWS_WITH_AS(m.eval_weighted(1, 5.0),
                       doctest::Contains("outside density support"),
                       NumericError);
}

TEST_CASE("spectral model JSON round trip is exact") {
  const Matrix h = 0.5 * (random_spd(5, 3) + random_spd(5, 3).transpose());
  const SpectralModel m = ritz_solve(h, hermite_basis(5), 0.25);
  const SpectralModel r = SpectralModel::from_json(m.to_json());
  CHECK((r.eigenvalues().array() == m.eigenvalues().array()).all());
  CHECK((r.coefficients().array() == m.coefficients().array()).all());
  CHECK(r.lag_time() == m.lag_time());
  CHECK(r.info().method == m.info().method);
}

TEST_CASE("solver output is deterministic") {
  const Matrix h = 0.5 * (random_spd(8, 5) + random_spd(8, 5).transpose());
  const Matrix s = random_spd(8, 6);
  const SpectralModel a = roothaan_hall_solve(h, s, hermite_basis(8), 1.0);
  const SpectralModel b = roothaan_hall_solve(h, s, hermite_basis(8), 1.0);
  CHECK(a.to_json().dump() == b.to_json().dump());
}
