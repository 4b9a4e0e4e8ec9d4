#include "slowspec/density.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "slowspec/io.hpp"

namespace slowspec {

DensityEstimate::DensityEstimate(Vector edges, Vector masses)
    : edges_(std::move(edges)), masses_(std::move(masses)) {
  if (edges_.size() < 2 || masses_.size() != edges_.size() - 1)
    throw ConfigError("DensityEstimate: edges/masses size mismatch");
  double total = 0.0;
  for (Index i = 0; i < masses_.size(); ++i) {
    if (!(edges_(i) < edges_(i + 1)))
      throw ConfigError("DensityEstimate: edges must be strictly increasing");
    if (masses_(i) < 0.0)
      throw ConfigError("DensityEstimate: masses must be nonnegative");
    total += masses_(i);
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ConfigError("DensityEstimate: masses must sum to 1");
  density_ = masses_.array() /
             (edges_.tail(masses_.size()) - edges_.head(masses_.size())).array();

  const double width0 = edges_(1) - edges_(0);
  uniform_ = true;
  for (Index i = 1; i < masses_.size(); ++i)
    if (std::abs((edges_(i + 1) - edges_(i)) - width0) > 1e-12 * width0)
      uniform_ = false;
  lo_ = edges_(0);
  inv_width_ = 1.0 / width0;
}

Index DensityEstimate::bin_index(double x) const {
  if (x < edges_(0) || x >= edges_(edges_.size() - 1)) return -1;
  if (uniform_) {
    Index i = static_cast<Index>((x - lo_) * inv_width_);
    return std::min(i, masses_.size() - 1);
  }
  const double* begin = edges_.data();
  return static_cast<Index>(
             std::upper_bound(begin, begin + edges_.size(), x) - begin) -
         1;
}

double DensityEstimate::density(double x) const {
  const Index i = bin_index(x);
  return i < 0 ? 0.0 : density_(i);
}

void DensityEstimate::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << "bin_left,bin_right,mass,density\n";
  for (Index i = 0; i < masses_.size(); ++i)
    out << format_g17(edges_(i)) << ',' << format_g17(edges_(i + 1)) << ','
        << format_g17(masses_(i)) << ',' << format_g17(density_(i)) << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

DensityEstimate estimate_stationary_density(const Trajectory& traj,
                                            const Vector& edges,
                                            const HistogramOptions& opts) {
  traj.validate();
  if (edges.size() < 2) throw ConfigError("histogram needs >= 2 edges");
  const Index nbins = edges.size() - 1;
  const double lo = edges(0), hi = edges(edges.size() - 1);
  const double width0 = edges(1) - edges(0);
  bool uniform = true;
  for (Index i = 1; i < nbins; ++i)
    if (std::abs((edges(i + 1) - edges(i)) - width0) > 1e-12 * width0)
      uniform = false;

  Eigen::VectorX<long long> counts = Eigen::VectorX<long long>::Zero(nbins);
  for (const double x : traj.states) {
    Index i;
    if (x < lo || x >= hi) {
      if (!opts.clamp_out_of_range)
        throw ConfigError("state outside histogram domain (enable clamping "
                          "or widen the edges)");
      i = x < lo ? 0 : nbins - 1;
    } else if (uniform) {
      i = std::min(static_cast<Index>((x - lo) / width0), nbins - 1);
    } else {
      const double* begin = edges.data();
      i = static_cast<Index>(
              std::upper_bound(begin, begin + edges.size(), x) - begin) -
          1;
    }
    ++counts(i);
  }
  // Masses as exact count ratios; they sum to 1 up to one rounding each.
  const double n = static_cast<double>(traj.states.size());
  Vector masses = counts.cast<double>() / n;
  return DensityEstimate(edges, std::move(masses));
}

Vector uniform_edges(double lo, double hi, Index nbins) {
  if (!(lo < hi) || nbins < 1) throw ConfigError("uniform_edges: bad range");
  return Vector::LinSpaced(nbins + 1, lo, hi);
}

BasisSet indicator_from_density(Vector edges, const DensityEstimate& mu) {
  if (edges.size() < 2) throw ConfigError("indicator basis needs >= 2 edges");
  const Index nb = edges.size() - 1;
  Vector pi = Vector::Zero(nb);
  // integral of the piecewise-constant density over each indicator bin
  for (Index j = 0; j < mu.size(); ++j) {
    const double lo = mu.edges()(j), hi = mu.edges()(j + 1);
    const double dens = mu.masses()(j) / (hi - lo);
    for (Index i = 0; i < nb; ++i) {
      const double overlap =
          std::min(hi, edges(i + 1)) - std::max(lo, edges(i));
      if (overlap > 0.0) pi(i) += dens * overlap;
    }
  }
  for (Index i = 0; i < nb; ++i)
    if (!(pi(i) > 0.0))
      throw NumericError("indicator bin " + std::to_string(i) +
                         " has zero estimated stationary weight");
  return BasisSet::indicator(std::move(edges), std::move(pi),
                             PiSource::Estimated);
}

}  // namespace slowspec
