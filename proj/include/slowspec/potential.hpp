#pragma once

#include <functional>

#include <nlohmann/json_fwd.hpp>

#include "slowspec/types.hpp"

namespace slowspec {

enum class PotentialKind { DoubleGaussian, Quartic, Flat };

/// A 1D benchmark potential with analytic stationary density and force.
///
/// DoubleGaussian: the stationary density is the normalized two-component
/// mixture
///     mu(x) = (1/2) * sum_i gh(x; a_i, s_i) / (s_i sqrt(pi)),
///     gh(x; a, s) = exp(-(x - a)^2 / s^2),
/// so each component has variance s^2/2 and for s1 = s2 = 1 the density is
/// exactly (1/(2 sqrt(pi))) (gh(x,a1,1) + gh(x,a2,1)).  The potential is
/// U = -ln(mu) and the force f = mu'/mu.
///
/// Quartic: U(x) = c4 x^4 + c2 x^2 + c0 (dimensionless), f = -U', and
/// mu = exp(-U)/Z with Z computed once by adaptive quadrature and cached.
///
/// Flat: U = 0, f = 0; stationary_density returns the improper uniform
/// weight 1 (there is no normalizable density on the line).
class PotentialSpec {
 public:
  static PotentialSpec double_gaussian(double a1, double a2, double s1,
                                       double s2);
  static PotentialSpec quartic(double c4, double c2, double c0);
  static PotentialSpec flat();

  PotentialKind kind() const { return kind_; }

  /// U(x); returns +infinity if the mixture density underflows to zero.
  double energy(double x) const;
  /// f(x) = -dU/dx, analytic per family.
  double force(double x) const;
  /// mu(x); normalized for DoubleGaussian and Quartic.
  double stationary_density(double x) const;

  /// Quartic only: the cached normalization Z = int exp(-U).
  double quartic_partition() const;

  // DoubleGaussian parameters.
  double center1() const { return p_[0]; }
  double center2() const { return p_[1]; }
  double width1() const { return p_[2]; }
  double width2() const { return p_[3]; }
  // Quartic coefficients.
  double c4() const { return p_[0]; }
  double c2() const { return p_[1]; }
  double c0() const { return p_[2]; }

  nlohmann::json to_json() const;
  static PotentialSpec from_json(const nlohmann::json& j);

  bool operator==(const PotentialSpec& other) const;

 private:
  PotentialSpec() = default;

  PotentialKind kind_ = PotentialKind::Flat;
  double p_[4] = {0, 0, 0, 0};
  double quartic_z_ = 0.0;
};

// Free-function forms of the three elementary operations.
inline double potential_energy(const PotentialSpec& p, double x) {
  return p.energy(x);
}
inline double force(const PotentialSpec& p, double x) { return p.force(x); }
inline double stationary_density(const PotentialSpec& p, double x) {
  return p.stationary_density(x);
}

/// Vectorized stationary density over a set of positions.
Vector stationary_density(const PotentialSpec& p,
                          const Eigen::Ref<const Vector>& x);
/// Vectorized force.
Vector force(const PotentialSpec& p, const Eigen::Ref<const Vector>& x);

/// Adaptive Gauss-Kronrod (G7/K15) quadrature of f on [a, b].
double adaptive_quadrature(const std::function<double(double)>& f, double a,
                           double b, double rel_tol = 1e-12,
                           double abs_tol = 1e-14);

}  // namespace slowspec
