#pragma once

#include <filesystem>

#include "slowspec/basis.hpp"
#include "slowspec/trajectory.hpp"
#include "slowspec/types.hpp"

namespace slowspec {

/// Histogram estimate of the stationary density: per-bin probability masses
/// over fixed edges, evaluated as a piecewise-constant density
/// (mass / bin width).  Evaluation outside the binned domain returns 0.
class DensityEstimate {
 public:
  DensityEstimate(Vector edges, Vector masses);

  Index size() const { return masses_.size(); }
  const Vector& edges() const { return edges_; }
  const Vector& masses() const { return masses_; }

  /// Bin index of x, or -1 outside [edges.front(), edges.back()).
  Index bin_index(double x) const;
  /// Piecewise-constant density at x.
  double density(double x) const;

  /// CSV rows: bin_left, bin_right, mass, density.
  void write_csv(const std::filesystem::path& path) const;

 private:
  Vector edges_, masses_, density_;
  bool uniform_ = false;
  double lo_ = 0, inv_width_ = 0;
};

struct HistogramOptions {
  /// Count out-of-range states into the first/last bin instead of failing.
  bool clamp_out_of_range = false;
};

DensityEstimate estimate_stationary_density(const Trajectory& traj,
                                            const Vector& edges,
                                            const HistogramOptions& = {});

Vector uniform_edges(double lo, double hi, Index nbins);

/// Indicator basis with estimated weights pi_i = int_{S_i} mu-hat dx from a
/// piecewise-constant density estimate.
BasisSet indicator_from_density(Vector edges, const DensityEstimate& mu);

}  // namespace slowspec
