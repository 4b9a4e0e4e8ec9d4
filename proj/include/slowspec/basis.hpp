#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "slowspec/potential.hpp"
#include "slowspec/types.hpp"

namespace slowspec {

enum class BasisKind { Indicator, Hermite, Gaussian };
enum class PiSource { Exact, Estimated };

/// An ordered family of scalar basis functions modeling half-weighted
/// eigenfunctions.
///
/// eval() returns the family-native values:
///   Indicator: 1/sqrt(pi_i) inside bin i, 0 elsewhere.  The indicator
///     family is interpreted as the half-weighted functions
///     chi_i = 1_{S_i} mu^{1/2} / sqrt(pi_i); the mu^{1/2} factor is carried
///     analytically (implicit_half_weight() below), which makes the
///     unweighted overlap the identity and lets the trajectory estimators
///     cancel it against their mu^{-1/2} weights exactly.
///   Hermite: normalized Hermite functions psi_0..psi_{n-1}, evaluated with
///     the stable function-space recurrence
///     psi_{i+1} = x sqrt(2/(i+1)) psi_i - sqrt(i/(i+1)) psi_{i-1}.
///   Gaussian: gh_i(x) = exp(-(x - y_i)^2 / (2 sigma_i^2)).
class BasisSet {
 public:
  /// Indicator family over strictly increasing bin edges with given
  /// stationary weights pi_i > 0.
  static BasisSet indicator(Vector edges, Vector pi, PiSource source);
  /// Indicator family with exact weights pi_i = int_{S_i} mu computed by
  /// adaptive quadrature of the potential's stationary density.
  static BasisSet indicator_from_potential(Vector edges,
                                           const PotentialSpec& p);
  /// Indicator family with weights from the grid's own quadrature measure,
  /// pi_i = sum_{x_g in S_i} mu(x_g) w_g, using the same node-to-bin
  /// assignment as eval().  This is the consistent choice for quadrature
  /// pipelines: the grid Gram matrix is then the identity exactly and the
  /// variational bound holds at machine precision.
  static BasisSet indicator_from_grid(Vector edges, const Grid& grid,
                                      const Eigen::Ref<const Vector>& mu);
  static BasisSet hermite(Index count);
  static BasisSet gaussian(Vector centers, Vector sigmas);

  BasisKind kind() const { return kind_; }
  Index size() const { return size_; }
  /// True when the family carries a mu^{1/2} factor analytically
  /// (Indicator); consumers must not divide native values by sqrt(mu-hat)
  /// again.
  bool implicit_half_weight() const { return kind_ == BasisKind::Indicator; }

  void eval_into(double x, double* out) const;
  Vector eval(double x) const;

  /// Half-weighted values phi_i(x_g) on grid nodes; sqrt_mu must hold
  /// sqrt(mu(x_g)).  For Hermite/Gaussian these equal eval(); for Indicator
  /// the implicit mu^{1/2} factor is applied.
  Matrix half_weighted_on_grid(const Grid& grid,
                               const Eigen::Ref<const Vector>& sqrt_mu) const;

  /// Closed-form unweighted overlap S_ij = int chi_i chi_j dx.
  /// Hermite and Indicator (half-weighted convention) give the identity;
  /// Gaussian uses the product-of-Gaussians formula, which for equal widths
  /// reduces to sigma sqrt(pi) exp(-(y_i - y_j)^2 / (4 sigma^2)).
  Matrix overlap_analytic() const;

  /// Diagnostic overlap of the raw (unweighted) indicator functions:
  /// diagonal entries (e_{i+1} - e_i) / pi_i.
  Matrix overlap_raw_indicator() const;

  struct QuadratureOverlap {
    Matrix S;
    bool narrow_grid_warning = false;
  };
  /// Trapezoidal quadrature of the native functions' Gram matrix on the
  /// grid; exactly symmetric.  Sets the warning when basis values at the
  /// grid boundary exceed 1e-8 of the on-grid maximum.
  QuadratureOverlap overlap_quadrature(const Grid& grid) const;

  const Vector& edges() const { return edges_; }
  const Vector& pi() const { return pi_; }
  PiSource pi_source() const { return pi_source_; }
  const Vector& centers() const { return centers_; }
  const Vector& sigmas() const { return sigmas_; }

  std::string id() const;
  nlohmann::json to_json() const;
  static BasisSet from_json(const nlohmann::json& j);

 private:
  BasisSet() = default;

  BasisKind kind_ = BasisKind::Hermite;
  Index size_ = 0;
  Vector edges_, pi_;  // indicator
  PiSource pi_source_ = PiSource::Exact;
  Vector inv_sqrt_pi_;
  Vector centers_, sigmas_;  // gaussian
};

}  // namespace slowspec
