#include "slowspec/reference.hpp"

#include <cmath>
#include <fstream>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "slowspec/io.hpp"
#include "slowspec/parallel.hpp"

namespace slowspec {

namespace {
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
}

double transition_density(const PotentialSpec& p, double x, double y,
                          double tau) {
  if (!(tau > 0.0)) throw ConfigError("transition_density: tau must be positive");
  const double sd = std::sqrt(2.0 * tau);
  const double z = (y - x - tau * p.force(x)) / sd;
  return kInvSqrt2Pi / sd * std::exp(-0.5 * z * z);
}

GridPropagator build_grid_propagator(const PotentialSpec& p, double tau,
                                     const Grid& grid,
                                     const GridPropagatorOptions& opts) {
  if (!(tau > 0.0)) throw ConfigError("build_grid_propagator: tau must be positive");
  const Index n = grid.n;

  GridPropagator gp;
  gp.grid_ = grid;
  gp.tau_ = tau;
  gp.mu_ = stationary_density(p, grid.nodes);
  gp.masses_ = gp.mu_.array() * grid.weights.array();
  const double mu_max = gp.mu_.maxCoeff();
  gp.endpoint_warning_ =
      gp.mu_(0) > 1e-10 * mu_max || gp.mu_(n - 1) > 1e-10 * mu_max;

  const Vector drifted = grid.nodes + tau * force(p, grid.nodes);
  const double sd = std::sqrt(2.0 * tau);

  // Rows of the transition kernel times quadrature weights; assembled in
  // fixed row chunks (disjoint writes, deterministic under any thread count).
  Matrix k(n, n);
  parallel_for_chunks(n, 64, [&](Index row_begin, Index row_end) {
    for (Index g = row_begin; g < row_end; ++g) {
      const double mean = drifted(g);
      for (Index h = 0; h < n; ++h) {
        const double z = (grid.nodes(h) - mean) / sd;
        k(g, h) = kInvSqrt2Pi / sd * std::exp(-0.5 * z * z) * grid.weights(h);
      }
    }
  });

  // mu-weighted off-grid mass leak before row renormalization.
  const Vector row_mass = k.rowwise().sum();
  const double total_mass = gp.masses_.sum();
  double leak = 0.0;
  for (Index g = 0; g < n; ++g)
    leak += gp.masses_(g) * std::max(0.0, 1.0 - row_mass(g));
  gp.mass_leak_ = leak / total_mass;
  if (gp.mass_leak_ >= opts.mass_leak_tolerance)
    throw NumericError("grid domain too small for tau: off-grid mass leak " +
                       std::to_string(gp.mass_leak_));
  for (Index g = 0; g < n; ++g) k.row(g) /= row_mass(g);

  // Symmetric kernel in sqrt(mass) coordinates, then the exact stationary
  // pair (1, sqrt(mu)) is enforced by deflation; the remaining spectrum
  // moves only at second order in the reversibility defect.
  const Vector sqrt_m = gp.masses_.array().sqrt();
  Matrix m = (sqrt_m.asDiagonal() * k) * sqrt_m.cwiseInverse().asDiagonal();
  m = 0.5 * (m + m.transpose()).eval();
  if (opts.stationary_correction) {
    const Vector u = sqrt_m / sqrt_m.norm();
    const Vector mu_vec = m * u;
    const double umu = u.dot(mu_vec);
    m -= u * mu_vec.transpose();
    m -= mu_vec * u.transpose();
    m += (umu + 1.0) * (u * u.transpose());
    m = 0.5 * (m + m.transpose()).eval();
  }
  gp.kernel_ = std::move(m);
  return gp;
}

Matrix GridPropagator::transition_matrix() const {
  const Vector sqrt_m = masses_.array().sqrt();
  return (sqrt_m.cwiseInverse().asDiagonal() * kernel_) * sqrt_m.asDiagonal();
}

double GridPropagator::max_row_sum_error() const {
  const Vector sqrt_m = masses_.array().sqrt();
  const Vector rows = (kernel_ * sqrt_m).cwiseQuotient(sqrt_m);
  return (rows.array() - 1.0).abs().maxCoeff();
}

double GridPropagator::detailed_balance_residual() const {
  // Spec form: max |mu_g K_gh - mu_h K_hg| over the max term, with
  // K_gh = sqrt(m_h/m_g) M_gh.  In these variables mu_g K_gh =
  // M_gh sqrt(m_g m_h) / w_g, so the residual reduces to the weight
  // asymmetry of the (symmetric) kernel at the grid edges.
  const Index n = grid_.n;
  const Vector sqrt_m = masses_.array().sqrt();
  double num = 0.0, den = 0.0;
  for (Index g = 0; g < n; ++g) {
    for (Index h = 0; h < n; ++h) {
      const double t = kernel_(g, h) * sqrt_m(g) * sqrt_m(h) / grid_.weights(g);
      const double t2 = kernel_(h, g) * sqrt_m(g) * sqrt_m(h) / grid_.weights(h);
      num = std::max(num, std::abs(t - t2));
      den = std::max(den, std::abs(t));
    }
  }
  return den > 0.0 ? num / den : 0.0;
}

GridPropagator GridPropagator::power(Index m) const {
  if (m < 1) throw ConfigError("GridPropagator::power: m must be >= 1");
  GridPropagator out = *this;
  out.tau_ = tau_ * static_cast<double>(m);
  Matrix acc = Matrix::Identity(kernel_.rows(), kernel_.cols());
  Matrix base = kernel_;
  Index e = m;
  while (e > 0) {
    if (e & 1) acc = (acc * base).eval();
    base = (base * base).eval();
    e >>= 1;
  }
  out.kernel_ = 0.5 * (acc + acc.transpose());
  return out;
}

ReferenceSpectrum reference_spectrum(const GridPropagator& gp, Index k) {
  const Index n = gp.grid().n;
  if (k < 1 || k > n)
    throw ConfigError("reference_spectrum: k out of range");
  Eigen::SelfAdjointEigenSolver<Matrix> es(gp.symmetric_kernel());
  if (es.info() != Eigen::Success)
    throw NumericError("reference_spectrum: eigendecomposition failed");

  ReferenceSpectrum rs;
  rs.grid = gp.grid();
  rs.tau = gp.tau();
  rs.mu = gp.mu();
  rs.eigenvalues = es.eigenvalues().reverse().head(k);
  rs.phi.resize(n, k);
  const Vector inv_sqrt_w = gp.grid().weights.array().sqrt().inverse();
  for (Index i = 0; i < k; ++i) {
    Vector phi = es.eigenvectors().col(n - 1 - i).cwiseProduct(inv_sqrt_w);
    // Re-normalize so sum_g phi^2 w = 1 exactly, then fix the sign by the
    // largest-magnitude value.
    const double norm = std::sqrt(
        (phi.array().square() * gp.grid().weights.array()).sum());
    phi /= norm;
    Index arg = 0;
    phi.array().abs().maxCoeff(&arg);
    if (phi(arg) < 0.0) phi = -phi;
    rs.phi.col(i) = phi;
  }
  return rs;
}

double ReferenceSpectrum::eigenfunction(Index i, double x) const {
  if (i < 0 || i >= eigenvalues.size())
    throw ConfigError("eigenfunction index out of range");
  if (x < grid.lo || x > grid.hi)
    throw NumericError("evaluation outside the reference grid domain");
  const double step = grid.spacing();
  Index g = std::min(static_cast<Index>((x - grid.lo) / step), grid.n - 2);
  const double t = (x - grid.nodes(g)) / step;
  return (1.0 - t) * phi(g, i) + t * phi(g + 1, i);
}

double ReferenceSpectrum::weighted_eigenfunction(Index i, double x,
                                                 double threshold) const {
  const double denom = eigenfunction(0, x);
  if (std::abs(denom) < threshold)
    throw NumericError("undefined outside density support");
  return eigenfunction(i, x) / denom;
}

nlohmann::json ReferenceSpectrum::to_json() const {
  nlohmann::json j;
  j["kind"] = "reference";
  j["tau"] = tau;
  j["grid"] = {{"lo", grid.lo}, {"hi", grid.hi}, {"n", grid.n}};
  j["eigenvalues"] = std::vector<double>(
      eigenvalues.data(), eigenvalues.data() + eigenvalues.size());
  j["phi"] = matrix_to_json(phi);
  j["mu"] = std::vector<double>(mu.data(), mu.data() + mu.size());
  return j;
}

void ReferenceSpectrum::write_eigenfunction_csv(
    const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << "x";
  for (Index i = 0; i < eigenvalues.size(); ++i) out << ",phi" << (i + 1);
  out << '\n';
  for (Index g = 0; g < grid.n; ++g) {
    out << format_g17(grid.nodes(g));
    for (Index i = 0; i < eigenvalues.size(); ++i)
      out << ',' << format_g17(phi(g, i));
    out << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

void ReferenceSpectrum::write_eigenvalue_csv(
    const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << "index,eigenvalue\n";
  for (Index i = 0; i < eigenvalues.size(); ++i)
    out << (i + 1) << ',' << format_g17(eigenvalues(i)) << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

double rayleigh_on_grid(const GridPropagator& gp,
                        const Eigen::Ref<const Vector>& phi_values) {
  if (phi_values.size() != gp.grid().n)
    throw ConfigError("rayleigh_on_grid: value count does not match the grid");
  const Vector v =
      phi_values.array() * gp.grid().weights.array().sqrt();
  const double norm2 = v.squaredNorm();
  if (!(norm2 > 0.0)) throw NumericError("rayleigh_on_grid: zero function");
  return v.dot(gp.symmetric_kernel() * v) / norm2;
}

Matrix quadrature_H(const GridPropagator& gp, const BasisSet& basis,
                    double* asymmetry) {
  const Vector sqrt_mu = gp.mu().array().sqrt();
  const Matrix phi = basis.half_weighted_on_grid(gp.grid(), sqrt_mu);
  const Matrix y = phi.array().colwise() * gp.grid().weights.array().sqrt();
  const Matrix h = y.transpose() * (gp.symmetric_kernel() * y);
  if (asymmetry != nullptr)
    *asymmetry = (h - h.transpose()).array().abs().maxCoeff();
  return 0.5 * (h + h.transpose());
}

Matrix quadrature_H(const PotentialSpec& p, const BasisSet& basis, double tau,
                    const Grid& grid, double* asymmetry) {
  return quadrature_H(build_grid_propagator(p, tau, grid), basis, asymmetry);
}

}  // namespace slowspec
