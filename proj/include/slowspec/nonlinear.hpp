#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include "slowspec/reference.hpp"
#include "slowspec/types.hpp"

namespace slowspec {

/// Odd two-Gaussian ansatz for the second half-weighted eigenfunction:
///   phi(x) = (gh(x; y2, s2) - gh(x; -y2, s2)) / Z,
///   gh(x; y, s) = exp(-(x - y)^2 / (2 s^2)),
///   Z^2 = 2 s2 sqrt(pi) (1 - exp(-y2^2 / s2^2)),
/// so <phi, phi> = 1 and phi(-x) = -phi(x) exactly.
class AntisymmetricAnsatz {
 public:
  AntisymmetricAnsatz(double center, double width);

  double center() const { return center_; }
  double width() const { return width_; }
  double normalization() const { return z_; }

  double value(double x) const;

 private:
  double center_, width_, z_;
};

/// Rayleigh coefficient of the normalized ansatz under the grid propagator's
/// half-weighted kernel; bounded above by the reference lambda_2.
double ansatz_rayleigh(const AntisymmetricAnsatz& a, const GridPropagator& gp);
double ansatz_rayleigh(const AntisymmetricAnsatz& a, const PotentialSpec& p,
                       double tau, const Grid& grid);

struct ScanPoint {
  double y = 0, s = 0, rayleigh = 0;
};

struct ScanOptions {
  Index scan_points = 41;   ///< coarse scan resolution per axis
  double param_tol = 1e-4;  ///< golden-section refinement tolerance
  /// Local maxima must exceed all four neighbors by at least this much to be
  /// reported.
  double prominence = 1e-12;
};

struct OptimizeResult {
  double y = 0, s = 0, rayleigh = 0;
  std::vector<ScanPoint> local_maxima;  ///< refined, sorted by value
  Vector ys, ss;                        ///< scan axes
  Matrix surface;                       ///< rayleigh at (ys_i, ss_j)
};

/// Coarse scan over (y2, s2) followed by coordinate-wise golden-section
/// refinement of every detected local maximum; deterministic for fixed
/// ranges and grid.
OptimizeResult optimize_ansatz(const PotentialSpec& p, double tau,
                               const Grid& grid,
                               std::pair<double, double> y_range,
                               std::pair<double, double> s_range,
                               const ScanOptions& = {});

/// CSV rows y2, s2, rayleigh of the scan surface.
void write_scan_csv(const std::filesystem::path& path,
                    const OptimizeResult& r);

}  // namespace slowspec
