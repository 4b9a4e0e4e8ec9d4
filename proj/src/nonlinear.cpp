#include "slowspec/nonlinear.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "slowspec/io.hpp"
#include "slowspec/parallel.hpp"

namespace slowspec {

namespace {
constexpr double kSqrtPi = 1.7724538509055160273;
constexpr double kGolden = 0.61803398874989484820;

double golden_section_max(const std::function<double(double)>& f, double lo,
                          double hi, double tol) {
  double a = lo, b = hi;
  double c = b - kGolden * (b - a);
  double d = a + kGolden * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kGolden * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kGolden * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

AntisymmetricAnsatz::AntisymmetricAnsatz(double center, double width)
    : center_(center), width_(width) {
  if (!(width > 0.0)) throw ConfigError("ansatz width must be positive");
  if (!std::isfinite(center)) throw ConfigError("ansatz center must be finite");
  const double z2 =
      2.0 * width * kSqrtPi *
      (1.0 - std::exp(-center * center / (width * width)));
  z_ = std::sqrt(std::max(z2, 0.0));
  if (!(z_ > 1e-12))
    throw NumericError("degenerate ansatz: normalization below 1e-12");
}

double AntisymmetricAnsatz::value(double x) const {
  const double dp = x - center_;
  const double dm = x + center_;
  return (std::exp(-dp * dp / (2.0 * width_ * width_)) -
          std::exp(-dm * dm / (2.0 * width_ * width_))) /
         z_;
}

double ansatz_rayleigh(const AntisymmetricAnsatz& a, const GridPropagator& gp) {
  Vector phi(gp.grid().n);
  for (Index g = 0; g < gp.grid().n; ++g) phi(g) = a.value(gp.grid().nodes(g));
  // The closed-form normalization makes <phi, phi> = 1; the kernel quadrature
  // then gives the Rayleigh coefficient directly.
  const Vector v = phi.array() * gp.grid().weights.array().sqrt();
  return v.dot(gp.symmetric_kernel() * v);
}

double ansatz_rayleigh(const AntisymmetricAnsatz& a, const PotentialSpec& p,
                       double tau, const Grid& grid) {
  return ansatz_rayleigh(a, build_grid_propagator(p, tau, grid));
}

OptimizeResult optimize_ansatz(const PotentialSpec& p, double tau,
                               const Grid& grid,
                               std::pair<double, double> y_range,
                               std::pair<double, double> s_range,
                               const ScanOptions& opts) {
  if (!(y_range.first > 0.0) || !(y_range.second > y_range.first) ||
      !(s_range.first > 0.0) || !(s_range.second > s_range.first))
    throw ConfigError("optimize_ansatz: ranges must be positive and ordered");
  if (opts.scan_points < 3)
    throw ConfigError("optimize_ansatz: need at least 3 scan points per axis");

  const GridPropagator gp = build_grid_propagator(p, tau, grid);
  const Index np = opts.scan_points;

  OptimizeResult res;
  res.ys = Vector::LinSpaced(np, y_range.first, y_range.second);
  res.ss = Vector::LinSpaced(np, s_range.first, s_range.second);
  res.surface.resize(np, np);

  auto rayleigh_at = [&](double y, double s) {
    return ansatz_rayleigh(AntisymmetricAnsatz(y, s), gp);
  };

  // Scan rows are independent; fixed chunking keeps the fill deterministic.
  parallel_for_chunks(np, 4, [&](Index begin, Index end) {
    for (Index i = begin; i < end; ++i)
      for (Index j = 0; j < np; ++j)
        res.surface(i, j) = rayleigh_at(res.ys(i), res.ss(j));
  });

  // Interior local maxima of the scan surface above the prominence margin.
  std::vector<ScanPoint> maxima;
  for (Index i = 1; i + 1 < np; ++i) {
    for (Index j = 1; j + 1 < np; ++j) {
      const double v = res.surface(i, j);
      const double nb = std::max({res.surface(i - 1, j), res.surface(i + 1, j),
                                  res.surface(i, j - 1), res.surface(i, j + 1)});
      if (v >= nb + opts.prominence)
        maxima.push_back({res.ys(i), res.ss(j), v});
    }
  }
  // Always refine from the global scan maximum as well.
  Index gi = 0, gj = 0;
  res.surface.maxCoeff(&gi, &gj);
  maxima.push_back({res.ys(gi), res.ss(gj), res.surface(gi, gj)});
  if (maxima.empty()) throw NumericError("optimize_ansatz: no usable scan values");

  const double dy = res.ys(1) - res.ys(0);
  const double ds = res.ss(1) - res.ss(0);
  std::vector<ScanPoint> refined;
  for (const ScanPoint& m : maxima) {
    double y = m.y, s = m.s;
    for (int sweep = 0; sweep < 6; ++sweep) {
      y = golden_section_max([&](double t) { return rayleigh_at(t, s); },
                             std::max(y_range.first, y - dy),
                             std::min(y_range.second, y + dy), opts.param_tol);
      s = golden_section_max([&](double t) { return rayleigh_at(y, t); },
                             std::max(s_range.first, s - ds),
                             std::min(s_range.second, s + ds), opts.param_tol);
    }
    refined.push_back({y, s, rayleigh_at(y, s)});
  }
  std::stable_sort(refined.begin(), refined.end(),
                   [](const ScanPoint& a, const ScanPoint& b) {
                     return a.rayleigh > b.rayleigh;
                   });
  // Deduplicate refined maxima that collapsed onto the same point.
  for (const ScanPoint& r : refined) {
    bool dup = false;
    for (const ScanPoint& kept : res.local_maxima)
      if (std::abs(kept.y - r.y) < 2.0 * opts.param_tol &&
          std::abs(kept.s - r.s) < 2.0 * opts.param_tol)
        dup = true;
    if (!dup) res.local_maxima.push_back(r);
  }
  res.y = res.local_maxima.front().y;
  res.s = res.local_maxima.front().s;
  res.rayleigh = res.local_maxima.front().rayleigh;
  return res;
}

void write_scan_csv(const std::filesystem::path& path,
                    const OptimizeResult& r) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << "y2,s2,rayleigh\n";
  for (Index i = 0; i < r.ys.size(); ++i)
    for (Index j = 0; j < r.ss.size(); ++j)
      out << format_g17(r.ys(i)) << ',' << format_g17(r.ss(j)) << ','
          << format_g17(r.surface(i, j)) << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace slowspec
