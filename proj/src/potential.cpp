#include "slowspec/potential.hpp"

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

namespace slowspec {

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;

// G7/K15 Gauss-Kronrod nodes and weights on [-1, 1].
constexpr double kKronrodX[15] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,                0.207784955007898,
    0.405845151377397,  0.586087235467691,  0.741531185599394,
    0.864864423359769,  0.949107912342759,  0.991455371120813};
constexpr double kKronrodW[15] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};
constexpr double kGaussW[7] = {0.129484966168870, 0.279705391489277,
                               0.381830050505119, 0.417959183673469,
                               0.381830050505119, 0.279705391489277,
                               0.129484966168870};

struct GkResult {
  double value;
  double error;
};

GkResult gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double kron = 0.0, gauss = 0.0;
  for (int i = 0; i < 15; ++i) {
    const double fx = f(c + h * kKronrodX[i]);
    kron += kKronrodW[i] * fx;
    if (i % 2 == 1) gauss += kGaussW[i / 2] * fx;
  }
  return {kron * h, std::abs(kron - gauss) * h};
}

void gk_adaptive(const std::function<double(double)>& f, double a, double b,
                 double tol, int depth, double* acc) {
  const GkResult r = gk15(f, a, b);
  if (r.error <= tol || depth >= 48) {
    *acc += r.value;
    return;
  }
  const double c = 0.5 * (a + b);
  gk_adaptive(f, a, c, 0.5 * tol, depth + 1, acc);
  gk_adaptive(f, c, b, 0.5 * tol, depth + 1, acc);
}

void require_finite(double x) {
  if (!std::isfinite(x)) throw ConfigError("position must be finite");
}

}  // namespace

double adaptive_quadrature(const std::function<double(double)>& f, double a,
                           double b, double rel_tol, double abs_tol) {
  const GkResult coarse = gk15(f, a, b);
  const double tol =
      std::max(abs_tol, rel_tol * std::max(1.0, std::abs(coarse.value)));
  double acc = 0.0;
  gk_adaptive(f, a, b, tol, 0, &acc);
  return acc;
}

PotentialSpec PotentialSpec::double_gaussian(double a1, double a2, double s1,
                                             double s2) {
  if (!(s1 > 0.0) || !(s2 > 0.0))
    throw ConfigError("DoubleGaussian widths must be strictly positive");
  PotentialSpec p;
  p.kind_ = PotentialKind::DoubleGaussian;
  p.p_[0] = a1;
  p.p_[1] = a2;
  p.p_[2] = s1;
  p.p_[3] = s2;
  return p;
}

PotentialSpec PotentialSpec::quartic(double c4, double c2, double c0) {
  if (!(c4 > 0.0)) throw ConfigError("Quartic requires c4 > 0");
  PotentialSpec p;
  p.kind_ = PotentialKind::Quartic;
  p.p_[0] = c4;
  p.p_[1] = c2;
  p.p_[2] = c0;
  // Normalization over the truncation domain [-3, 3]; the density there is
  // below 1e-10 of its maximum for the benchmark coefficients.
  p.quartic_z_ = adaptive_quadrature(
      [&](double x) {
        return std::exp(-(c4 * x * x * x * x + c2 * x * x + c0));
      },
      -3.0, 3.0);
  if (!(p.quartic_z_ > 0.0) || !std::isfinite(p.quartic_z_))
    throw NumericError("quartic partition function is not positive");
  return p;
}

PotentialSpec PotentialSpec::flat() {
  PotentialSpec p;
  p.kind_ = PotentialKind::Flat;
  return p;
}

double PotentialSpec::energy(double x) const {
  require_finite(x);
  switch (kind_) {
    case PotentialKind::Flat:
      return 0.0;
    case PotentialKind::Quartic:
      return p_[0] * x * x * x * x + p_[1] * x * x + p_[2];
    case PotentialKind::DoubleGaussian: {
      const double d = stationary_density(x);
      if (d <= 0.0) return std::numeric_limits<double>::infinity();
      return -std::log(d);
    }
  }
  return 0.0;
}

double PotentialSpec::force(double x) const {
  require_finite(x);
  switch (kind_) {
    case PotentialKind::Flat:
      return 0.0;
    case PotentialKind::Quartic:
      return -4.0 * p_[0] * x * x * x - 2.0 * p_[1] * x;
    case PotentialKind::DoubleGaussian: {
      if (stationary_density(x) <= 0.0)
        throw NumericError("force undefined in zero-density region");
      // f = mu'/mu evaluated through exponent-shifted component ratios.
      const double e1 = -(x - p_[0]) * (x - p_[0]) / (p_[2] * p_[2]);
      const double e2 = -(x - p_[1]) * (x - p_[1]) / (p_[3] * p_[3]);
      const double emax = std::max(e1, e2);
      const double r1 = std::exp(e1 - emax) / p_[2];
      const double r2 = std::exp(e2 - emax) / p_[3];
      const double num = -2.0 * (x - p_[0]) / (p_[2] * p_[2]) * r1 -
                         2.0 * (x - p_[1]) / (p_[3] * p_[3]) * r2;
      return num / (r1 + r2);
    }
  }
  return 0.0;
}

double PotentialSpec::stationary_density(double x) const {
  require_finite(x);
  switch (kind_) {
    case PotentialKind::Flat:
      return 1.0;  // improper uniform weight
    case PotentialKind::Quartic:
      return std::exp(-energy(x)) / quartic_z_;
    case PotentialKind::DoubleGaussian: {
      const double g1 = std::exp(-(x - p_[0]) * (x - p_[0]) / (p_[2] * p_[2]));
      const double g2 = std::exp(-(x - p_[1]) * (x - p_[1]) / (p_[3] * p_[3]));
      return 0.5 * (g1 / p_[2] + g2 / p_[3]) / kSqrtPi;
    }
  }
  return 0.0;
}

double PotentialSpec::quartic_partition() const {
  if (kind_ != PotentialKind::Quartic)
    throw ConfigError("quartic_partition: not a quartic potential");
  return quartic_z_;
}

Vector stationary_density(const PotentialSpec& p,
                          const Eigen::Ref<const Vector>& x) {
  Vector out(x.size());
  for (Index i = 0; i < x.size(); ++i) out(i) = p.stationary_density(x(i));
  return out;
}

Vector force(const PotentialSpec& p, const Eigen::Ref<const Vector>& x) {
  Vector out(x.size());
  for (Index i = 0; i < x.size(); ++i) out(i) = p.force(x(i));
  return out;
}

nlohmann::json PotentialSpec::to_json() const {
  switch (kind_) {
    case PotentialKind::Flat:
      return {{"kind", "flat"}};
    case PotentialKind::Quartic:
      return {{"kind", "quartic"}, {"c4", p_[0]}, {"c2", p_[1]}, {"c0", p_[2]}};
    case PotentialKind::DoubleGaussian:
      return {{"kind", "double-gaussian"},
              {"centers", {p_[0], p_[1]}},
              {"widths", {p_[2], p_[3]}}};
  }
  return {};
}

PotentialSpec PotentialSpec::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "flat") return flat();
  if (kind == "quartic")
    return quartic(j.at("c4").get<double>(), j.at("c2").get<double>(),
                   j.at("c0").get<double>());
  if (kind == "double-gaussian") {
    const auto& c = j.at("centers");
    const auto& w = j.at("widths");
    if (c.size() != 2 || w.size() != 2)
      throw ConfigError("double-gaussian requires 2 centers and 2 widths");
    return double_gaussian(c[0].get<double>(), c[1].get<double>(),
                           w[0].get<double>(), w[1].get<double>());
  }
  throw ConfigError("unknown potential kind: " + kind);
}

bool PotentialSpec::operator==(const PotentialSpec& other) const {
  if (kind_ != other.kind_) return false;
  for (int i = 0; i < 4; ++i)
    if (p_[i] != other.p_[i]) return false;
  return true;
}

}  // namespace slowspec
