#pragma once

#include <filesystem>

#include <nlohmann/json_fwd.hpp>

#include "slowspec/basis.hpp"
#include "slowspec/potential.hpp"
#include "slowspec/types.hpp"

namespace slowspec {

struct GridPropagatorOptions {
  /// Enforce the exact stationary eigenpair (1, sqrt(mu)) on the
  /// symmetrized kernel; the rest of the spectrum moves only at second
  /// order in the symmetrization defect.
  bool stationary_correction = true;
  /// Error when more than this fraction of mu-weighted transition mass
  /// drifts off the grid.
  double mass_leak_tolerance = 1e-6;
};

/// Dense grid discretization of the transition kernel
/// p(x, y; tau) = N_y(x + tau f(x), sqrt(2 tau)).
///
/// Internally stores the symmetric half-weighted kernel matrix
/// M_gh = sqrt(m_g/m_h) K_gh with m_g = mu_g w_g and K the row-normalized
/// transition matrix; rows of the reconstructed K sum to 1 and detailed
/// balance mu_g K_gh = mu_h K_hg holds to near machine precision.
class GridPropagator {
 public:
  const Grid& grid() const { return grid_; }
  double tau() const { return tau_; }
  const Vector& mu() const { return mu_; }
  const Vector& masses() const { return masses_; }
  /// Symmetric kernel M in sqrt(mass) coordinates.
  const Matrix& symmetric_kernel() const { return kernel_; }

  /// K_gh ~ p(x_g, x_h; tau) w_h reconstructed from the symmetric kernel.
  Matrix transition_matrix() const;

  double max_row_sum_error() const;
  /// max_gh |mu_g K_gh - mu_h K_hg| / max_gh |mu_g K_gh|.
  double detailed_balance_residual() const;
  double mass_leak() const { return mass_leak_; }
  bool endpoint_density_warning() const { return endpoint_warning_; }

  /// Discrete Chapman-Kolmogorov composition: the m-step propagator on the
  /// same grid, with lag m * tau.
  GridPropagator power(Index m) const;

  friend GridPropagator build_grid_propagator(const PotentialSpec&, double,
                                              const Grid&,
                                              const GridPropagatorOptions&);

 private:
  GridPropagator() = default;

  Grid grid_;
  double tau_ = 0;
  Vector mu_, masses_;
  Matrix kernel_;
  double mass_leak_ = 0;
  bool endpoint_warning_ = false;
};

/// The Gaussian one-step transition density p(x, y; tau).
double transition_density(const PotentialSpec& p, double x, double y,
                          double tau);

GridPropagator build_grid_propagator(const PotentialSpec& p, double tau,
                                     const Grid& grid,
                                     const GridPropagatorOptions& = {});

/// Top-k eigenpairs of the grid propagator: reference eigenvalues and
/// grid-sampled half-weighted eigenfunctions phi_i with
/// sum_g phi_i(x_g)^2 w_g = 1 and the largest-magnitude value positive.
struct ReferenceSpectrum {
  Grid grid;
  double tau = 0;
  Vector eigenvalues;
  Matrix phi;  ///< n x k
  Vector mu;

  /// Linear interpolation of phi_i; throws outside the grid domain.
  double eigenfunction(Index i, double x) const;
  /// Unweighted eigenfunction r_i(x) = phi_i(x) / phi_1(x).
  double weighted_eigenfunction(Index i, double x,
                                double threshold = 1e-12) const;

  nlohmann::json to_json() const;
  void write_eigenfunction_csv(const std::filesystem::path& path) const;
  void write_eigenvalue_csv(const std::filesystem::path& path) const;
};

ReferenceSpectrum reference_spectrum(const GridPropagator& gp, Index k);

/// Rayleigh quotient of arbitrary grid-sampled half-weighted values against
/// the propagator kernel (normalized by the quadrature norm of the values).
double rayleigh_on_grid(const GridPropagator& gp,
                        const Eigen::Ref<const Vector>& phi_values);

/// Quadrature density matrix h_ij = sum_{g,h} phi_i(x_g) S(x_g, x_h; tau)
/// phi_j(x_h) w_g w_h over the half-weighted basis values; output exactly
/// symmetric, with the enforced asymmetry reported through *asymmetry.
Matrix quadrature_H(const GridPropagator& gp, const BasisSet& basis,
                    double* asymmetry = nullptr);
Matrix quadrature_H(const PotentialSpec& p, const BasisSet& basis, double tau,
                    const Grid& grid, double* asymmetry = nullptr);

}  // namespace slowspec
