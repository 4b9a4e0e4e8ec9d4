#include "slowspec/basis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

namespace slowspec {

namespace {
constexpr double kSqrtPi = 1.7724538509055160273;
constexpr double kTwoPi = 6.2831853071795864769;
}  // namespace

BasisSet BasisSet::indicator(Vector edges, Vector pi, PiSource source) {
  if (edges.size() < 2) throw ConfigError("indicator basis needs >= 2 edges");
  if (pi.size() != edges.size() - 1)
    throw ConfigError("indicator basis: need one weight per bin");
  for (Index i = 0; i + 1 < edges.size(); ++i)
    if (!(edges(i) < edges(i + 1)))
      throw ConfigError("indicator edges must be strictly increasing");
  for (Index i = 0; i < pi.size(); ++i)
    if (!(pi(i) > 0.0))
      throw ConfigError("indicator stationary weights must be positive");
  BasisSet b;
  b.kind_ = BasisKind::Indicator;
  b.size_ = pi.size();
  b.edges_ = std::move(edges);
  b.pi_ = std::move(pi);
  b.pi_source_ = source;
  b.inv_sqrt_pi_ = b.pi_.array().sqrt().inverse();
  return b;
}

BasisSet BasisSet::indicator_from_potential(Vector edges,
                                            const PotentialSpec& p) {
  if (edges.size() < 2) throw ConfigError("indicator basis needs >= 2 edges");
  Vector pi(edges.size() - 1);
  for (Index i = 0; i + 1 < edges.size(); ++i)
    pi(i) = adaptive_quadrature(
        [&](double x) { return p.stationary_density(x); }, edges(i),
        edges(i + 1));
  return indicator(std::move(edges), std::move(pi), PiSource::Exact);
}

BasisSet BasisSet::indicator_from_grid(Vector edges, const Grid& grid,
                                       const Eigen::Ref<const Vector>& mu) {
  if (edges.size() < 2) throw ConfigError("indicator basis needs >= 2 edges");
  if (mu.size() != grid.n)
    throw ConfigError("indicator_from_grid: mu size mismatch");
  const Index nb = edges.size() - 1;
  Vector pi = Vector::Zero(nb);
  for (Index g = 0; g < grid.n; ++g) {
    const double x = grid.nodes(g);
    if (x < edges(0) || x >= edges(nb)) continue;
    const double* begin = edges.data();
    Index i = static_cast<Index>(
                  std::upper_bound(begin, begin + nb + 1, x) - begin) -
              1;
    if (i >= nb) i = nb - 1;
    pi(i) += mu(g) * grid.weights(g);
  }
  for (Index i = 0; i < nb; ++i)
    if (!(pi(i) > 0.0))
      throw NumericError("indicator bin " + std::to_string(i) +
                         " has zero stationary weight on this grid");
  return indicator(std::move(edges), std::move(pi), PiSource::Exact);
}

BasisSet BasisSet::hermite(Index count) {
  if (count < 1) throw ConfigError("hermite basis needs count >= 1");
  BasisSet b;
  b.kind_ = BasisKind::Hermite;
  b.size_ = count;
  return b;
}

BasisSet BasisSet::gaussian(Vector centers, Vector sigmas) {
  if (centers.size() < 1) throw ConfigError("gaussian basis needs >= 1 center");
  if (sigmas.size() != centers.size())
    throw ConfigError("gaussian basis: need one sigma per center");
  for (Index i = 0; i < sigmas.size(); ++i)
    if (!(sigmas(i) > 0.0)) throw ConfigError("gaussian sigmas must be positive");
  for (Index i = 0; i < centers.size(); ++i)
    for (Index j = i + 1; j < centers.size(); ++j)
      if (centers(i) == centers(j) && sigmas(i) == sigmas(j))
        throw ConfigError("singular overlap: duplicate gaussian (center, sigma)");
  BasisSet b;
  b.kind_ = BasisKind::Gaussian;
  b.size_ = centers.size();
  b.centers_ = std::move(centers);
  b.sigmas_ = std::move(sigmas);
  return b;
}

void BasisSet::eval_into(double x, double* out) const {
  switch (kind_) {
    case BasisKind::Indicator: {
      std::fill(out, out + size_, 0.0);
      if (x < edges_(0) || x >= edges_(size_)) return;
      // bin i covers [e_i, e_{i+1}); the last bin is closed above by the
      // x >= edges_(size_) check rejecting only strictly-outside points.
      const double* begin = edges_.data();
      Index i = static_cast<Index>(
                    std::upper_bound(begin, begin + size_ + 1, x) - begin) -
                1;
      if (i >= size_) i = size_ - 1;
      out[i] = inv_sqrt_pi_(i);
      return;
    }
    case BasisKind::Hermite: {
      // psi_0 = pi^{-1/4} e^{-x^2/2}; three-term recurrence on the
      // functions themselves, stable for large counts.
      const double psi0 = 0.75112554446494248 * std::exp(-0.5 * x * x);
      out[0] = psi0;
      if (size_ == 1) return;
      out[1] = std::sqrt(2.0) * x * psi0;
      for (Index i = 1; i + 1 < size_; ++i)
        out[i + 1] = x * std::sqrt(2.0 / static_cast<double>(i + 1)) * out[i] -
                     std::sqrt(static_cast<double>(i) /
                               static_cast<double>(i + 1)) *
                         out[i - 1];
      return;
    }
    case BasisKind::Gaussian: {
      for (Index i = 0; i < size_; ++i) {
        const double d = x - centers_(i);
        out[i] = std::exp(-d * d / (2.0 * sigmas_(i) * sigmas_(i)));
      }
      return;
    }
  }
}

Vector BasisSet::eval(double x) const {
  Vector v(size_);
  eval_into(x, v.data());
  return v;
}

Matrix BasisSet::half_weighted_on_grid(
    const Grid& grid, const Eigen::Ref<const Vector>& sqrt_mu) const {
  if (sqrt_mu.size() != grid.n)
    throw ConfigError("half_weighted_on_grid: sqrt_mu size mismatch");
  Matrix phi(grid.n, size_);
  Vector row(size_);
  for (Index g = 0; g < grid.n; ++g) {
    eval_into(grid.nodes(g), row.data());
    phi.row(g) = row;
  }
  if (implicit_half_weight()) phi.array().colwise() *= sqrt_mu.array();
  return phi;
}

Matrix BasisSet::overlap_analytic() const {
  switch (kind_) {
    case BasisKind::Hermite:
    case BasisKind::Indicator:
      // Orthonormal families under the unweighted product (the indicator
      // family in its half-weighted interpretation).
      return Matrix::Identity(size_, size_);
    case BasisKind::Gaussian: {
      for (Index i = 0; i < size_; ++i)
        for (Index j = i + 1; j < size_; ++j)
          if (centers_(i) == centers_(j) && sigmas_(i) == sigmas_(j))
            throw NumericError("singular overlap: duplicate gaussian entries");
      Matrix s(size_, size_);
      for (Index i = 0; i < size_; ++i) {
        for (Index j = 0; j <= i; ++j) {
          const double a = sigmas_(i) * sigmas_(i);
          const double b = sigmas_(j) * sigmas_(j);
          const double d = centers_(i) - centers_(j);
          const double v = std::sqrt(kTwoPi * a * b / (a + b)) *
                           std::exp(-d * d / (2.0 * (a + b)));
          s(i, j) = v;
          s(j, i) = v;
        }
      }
      return s;
    }
  }
  return Matrix();
}

Matrix BasisSet::overlap_raw_indicator() const {
  if (kind_ != BasisKind::Indicator)
    throw ConfigError("overlap_raw_indicator: indicator bases only");
  Matrix s = Matrix::Zero(size_, size_);
  for (Index i = 0; i < size_; ++i)
    s(i, i) = (edges_(i + 1) - edges_(i)) / pi_(i);
  return s;
}

BasisSet::QuadratureOverlap BasisSet::overlap_quadrature(
    const Grid& grid) const {
  Matrix phi(grid.n, size_);
  Vector row(size_);
  for (Index g = 0; g < grid.n; ++g) {
    eval_into(grid.nodes(g), row.data());
    phi.row(g) = row;
  }
  const Matrix weighted =
      phi.array().colwise() * grid.weights.array().sqrt();
  Matrix s(size_, size_);
  s.setZero();
  s.selfadjointView<Eigen::Lower>().rankUpdate(weighted.transpose());
  s.triangularView<Eigen::StrictlyUpper>() =
      s.transpose().triangularView<Eigen::StrictlyUpper>();

  QuadratureOverlap out{std::move(s), false};
  const double peak = phi.array().abs().maxCoeff();
  const double boundary = std::max(phi.row(0).array().abs().maxCoeff(),
                                   phi.row(grid.n - 1).array().abs().maxCoeff());
  if (peak > 0.0 && boundary > 1e-8 * peak) out.narrow_grid_warning = true;
  return out;
}

std::string BasisSet::id() const {
  std::ostringstream os;
  switch (kind_) {
    case BasisKind::Indicator:
      os << "indicator-" << size_ << "[" << edges_(0) << "," << edges_(size_)
         << "]" << (pi_source_ == PiSource::Exact ? ":exact-pi" : ":estimated-pi");
      break;
    case BasisKind::Hermite:
      os << "hermite-" << size_;
      break;
    case BasisKind::Gaussian:
      os << "gaussian-" << size_;
      break;
  }
  return os.str();
}

nlohmann::json BasisSet::to_json() const {
  switch (kind_) {
    case BasisKind::Indicator: {
      nlohmann::json j{{"kind", "indicator"}};
      j["edges"] = std::vector<double>(edges_.data(), edges_.data() + edges_.size());
      j["pi"] = std::vector<double>(pi_.data(), pi_.data() + pi_.size());
      j["pi_source"] =
          pi_source_ == PiSource::Exact ? "exact" : "estimated";
      return j;
    }
    case BasisKind::Hermite:
      return {{"kind", "hermite"}, {"count", size_}};
    case BasisKind::Gaussian: {
      nlohmann::json j{{"kind", "gaussian"}};
      j["centers"] =
          std::vector<double>(centers_.data(), centers_.data() + size_);
      j["sigmas"] = std::vector<double>(sigmas_.data(), sigmas_.data() + size_);
      return j;
    }
  }
  return {};
}

BasisSet BasisSet::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  auto to_vector = [](const nlohmann::json& a) {
    Vector v(a.size());
    for (Index i = 0; i < v.size(); ++i)
      v(i) = a[static_cast<std::size_t>(i)].get<double>();
    return v;
  };
  if (kind == "hermite") return hermite(j.at("count").get<Index>());
  if (kind == "gaussian")
    return gaussian(to_vector(j.at("centers")), to_vector(j.at("sigmas")));
  if (kind == "indicator") {
    Vector edges = to_vector(j.at("edges"));
    if (!j.contains("pi"))
      throw ConfigError(
          "indicator basis JSON without pi weights; attach a potential or "
          "density estimate to derive them");
    const PiSource src = j.value("pi_source", std::string("exact")) == "exact"
                             ? PiSource::Exact
                             : PiSource::Estimated;
    return indicator(std::move(edges), to_vector(j.at("pi")), src);
  }
  throw ConfigError("unknown basis kind: " + kind);
}

}  // namespace slowspec
