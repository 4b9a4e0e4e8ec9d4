#include "slowspec/estimators.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "slowspec/eigensolver.hpp"
#include "slowspec/rng.hpp"

namespace slowspec {

namespace {

constexpr Index kBlock = 65536;

void kahan_add(Matrix& acc, Matrix& comp, const Matrix& term) {
  const Matrix y = term - comp;
  const Matrix t = acc + y;
  comp = (t - acc) - y;
  acc = t;
}

void kahan_add(double& acc, double& comp, double term) {
  const double y = term - comp;
  const double t = acc + y;
  comp = (t - acc) - y;
  acc = t;
}

// Weighted basis values w_i(x) = mu-hat^{-1/2}(x) phi_i(x); for families
// carrying the mu^{1/2} factor analytically the native values are returned
// unchanged.  Returns false for frames in zero-density bins.
class WeightedEvaluator {
 public:
  WeightedEvaluator(const BasisSet& basis, const DensityEstimate& mu)
      : basis_(basis), mu_(mu), needs_division_(!basis.implicit_half_weight()) {}

  bool eval(double x, double* out) const {
    basis_.eval_into(x, out);
    if (!needs_division_) return true;
    const double d = mu_.density(x);
    if (!(d > 0.0)) return false;
    const double inv = 1.0 / std::sqrt(d);
    for (Index i = 0; i < basis_.size(); ++i) out[i] *= inv;
    return true;
  }

 private:
  const BasisSet& basis_;
  const DensityEstimate& mu_;
  bool needs_division_;
};

struct Accumulated {
  Matrix sum;       // unnormalized sum of products
  Index pairs = 0;  // valid pairs entering the sum
  Index invalid_frames = 0;
};

// Sum over positions p of w(x_{p s}) w(x_{p s + lag})^T in fixed blocks with
// compensated block summation.  lag == 0 uses a self-adjoint rank update, so
// the result is exactly symmetric and estimate_S shares the code path of
// estimate_H bit for bit.
Accumulated accumulate_products(const Trajectory& traj,
                                const WeightedEvaluator& eval, Index lag,
                                Index stride, Index m) {
  const Index n = traj.size();
  const Index positions = (n - 1 - lag) / stride + 1;

  Matrix acc = Matrix::Zero(m, m), comp = Matrix::Zero(m, m);
  Matrix left(kBlock, m), right;
  std::vector<char> ok_left(kBlock), ok_right;
  const bool lagged = lag != 0;
  if (lagged) {
    right.resize(kBlock, m);
    ok_right.resize(kBlock);
  }

  Accumulated out;
  Vector row(m);
  Index invalid = 0;

  for (Index start = 0; start < positions; start += kBlock) {
    const Index count = std::min(kBlock, positions - start);
    for (Index p = 0; p < count; ++p) {
      const Index k = (start + p) * stride;
      const bool okl = eval.eval(traj.states[static_cast<std::size_t>(k)],
                                 row.data());
      ok_left[static_cast<std::size_t>(p)] = okl;
      if (okl)
        left.row(p) = row.transpose();
      else
        left.row(p).setZero();
      if (lagged) {
        const bool okr = eval.eval(
            traj.states[static_cast<std::size_t>(k + lag)], row.data());
        ok_right[static_cast<std::size_t>(p)] = okr;
        if (okr)
          right.row(p) = row.transpose();
        else
          right.row(p).setZero();
      }
    }
    Index valid_pairs = 0;
    if (lagged) {
      for (Index p = 0; p < count; ++p)
        if (ok_left[static_cast<std::size_t>(p)] &&
            ok_right[static_cast<std::size_t>(p)])
          ++valid_pairs;
      const Matrix partial =
          left.topRows(count).transpose() * right.topRows(count);
      kahan_add(acc, comp, partial);
    } else {
      for (Index p = 0; p < count; ++p)
        if (ok_left[static_cast<std::size_t>(p)]) ++valid_pairs;
      Matrix partial = Matrix::Zero(m, m);
      partial.selfadjointView<Eigen::Lower>().rankUpdate(
          left.topRows(count).transpose());
      kahan_add(acc, comp, partial);
    }
    out.pairs += valid_pairs;
    for (Index p = 0; p < count; ++p)
      if (!ok_left[static_cast<std::size_t>(p)]) ++invalid;
  }
  if (!lagged)
    acc.triangularView<Eigen::StrictlyUpper>() =
        acc.transpose().triangularView<Eigen::StrictlyUpper>();
  out.sum = std::move(acc);
  out.invalid_frames = invalid;
  return out;
}

void check_estimator_inputs(const Trajectory& traj, Index lag,
                            const EstimatorOptions& opts) {
  traj.validate();
  if (lag < 0) throw ConfigError("lag must be nonnegative");
  if (lag >= traj.size())
    throw ConfigError("lag must be smaller than the trajectory length");
  if (opts.stride < 1) throw ConfigError("stride must be >= 1");
}

}  // namespace

CorrelationMatrices estimate_correlation_matrices(const Trajectory& traj,
                                                  const BasisSet& basis,
                                                  const DensityEstimate& mu,
                                                  Index lag,
                                                  const EstimatorOptions& opts) {
  check_estimator_inputs(traj, lag, opts);
  const Index m = basis.size();
  const WeightedEvaluator eval(basis, mu);

  const Accumulated hs = accumulate_products(traj, eval, lag, opts.stride, m);
  const Accumulated ss = accumulate_products(traj, eval, 0, opts.stride, m);

  const Index n_frames = (traj.size() - 1) / opts.stride + 1;
  if (static_cast<double>(ss.invalid_frames) >
      opts.max_skipped_fraction * static_cast<double>(n_frames))
    throw NumericError("density estimate inconsistent with trajectory: " +
                       std::to_string(ss.invalid_frames) +
                       " zero-density frames");
  if (hs.pairs == 0) throw NumericError("no valid lagged pairs");

  CorrelationMatrices out;
  out.H = hs.sum / static_cast<double>(hs.pairs);
  if (opts.symmetrize && lag != 0) out.H = 0.5 * (out.H + out.H.transpose()).eval();
  out.S = ss.sum / static_cast<double>(ss.pairs);
  out.lag = lag;
  out.frames_used = hs.pairs;
  out.basis_id = basis.id();
  out.symmetrized = opts.symmetrize;
  out.skipped_frames = ss.invalid_frames;
  return out;
}

Matrix estimate_H(const Trajectory& traj, const BasisSet& basis,
                  const DensityEstimate& mu, Index lag,
                  const EstimatorOptions& opts) {
  check_estimator_inputs(traj, lag, opts);
  const WeightedEvaluator eval(basis, mu);
  const Accumulated hs =
      accumulate_products(traj, eval, lag, opts.stride, basis.size());
  const Index n_frames = (traj.size() - 1) / opts.stride + 1;
  if (static_cast<double>(hs.invalid_frames) >
      opts.max_skipped_fraction * static_cast<double>(n_frames))
    throw NumericError("density estimate inconsistent with trajectory: " +
                       std::to_string(hs.invalid_frames) +
                       " zero-density frames");
  if (hs.pairs == 0) throw NumericError("no valid lagged pairs");
  Matrix H = hs.sum / static_cast<double>(hs.pairs);
  if (opts.symmetrize && lag != 0) H = 0.5 * (H + H.transpose()).eval();
  return H;
}

Matrix estimate_S(const Trajectory& traj, const BasisSet& basis,
                  const DensityEstimate& mu, const EstimatorOptions& opts) {
  return estimate_H(traj, basis, mu, 0, opts);
}

double rayleigh_coefficient(const Trajectory& traj,
                            const std::function<double(double)>& f, Index lag,
                            const RayleighOptions& opts) {
  EstimatorOptions eo;
  eo.stride = opts.stride;
  check_estimator_inputs(traj, lag, eo);

  const Index n = traj.size();
  std::vector<double> fx(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) {
    fx[static_cast<std::size_t>(k)] = f(traj.states[static_cast<std::size_t>(k)]);
    if (!std::isfinite(fx[static_cast<std::size_t>(k)]))
      throw NumericError("test function returned a non-finite value");
  }

  const Index pairs = (n - 1 - lag) / opts.stride + 1;
  double acc = 0, comp = 0;
  for (Index p = 0; p < pairs; ++p) {
    const Index k = p * opts.stride;
    kahan_add(acc, comp, fx[static_cast<std::size_t>(k)] *
                             fx[static_cast<std::size_t>(k + lag)]);
  }
  double value = acc / static_cast<double>(pairs);
  if (opts.normalize) {
    const Index frames = (n - 1) / opts.stride + 1;
    double acc2 = 0, comp2 = 0;
    for (Index p = 0; p < frames; ++p) {
      const double v = fx[static_cast<std::size_t>(p * opts.stride)];
      kahan_add(acc2, comp2, v * v);
    }
    const double norm = acc2 / static_cast<double>(frames);
    if (!(norm > 0.0)) throw NumericError("test function has zero norm");
    value /= norm;
  }
  return value;
}

namespace {

// Circular block bootstrap of a ratio mean(h)/mean(s) over a fixed block
// partition; with keep_ratio == false only mean(h) is resampled.
struct RatioBootstrap {
  double std_error = 0;
  Index blocks = 0;
};

RatioBootstrap bootstrap_ratio(const std::vector<double>& h,
                               const std::vector<double>& s, bool use_ratio,
                               Index block_length, Index samples,
                               std::uint64_t seed) {
  const Index nh = static_cast<Index>(h.size());
  const Index nb = (nh + block_length - 1) / block_length;
  std::vector<double> hb(static_cast<std::size_t>(nb), 0.0);
  std::vector<double> sb(static_cast<std::size_t>(nb), 0.0);
  for (Index b = 0; b < nb; ++b) {
    for (Index i = 0; i < block_length; ++i) {
      const Index k = (b * block_length + i) % nh;  // circular wrap
      hb[static_cast<std::size_t>(b)] += h[static_cast<std::size_t>(k)];
      if (use_ratio) {
        const Index ks = k % static_cast<Index>(s.size());
        sb[static_cast<std::size_t>(b)] += s[static_cast<std::size_t>(ks)];
      }
    }
  }
  double mean = 0, m2 = 0;
  std::vector<double> draws(static_cast<std::size_t>(samples));
  std::uint64_t ctr = 0;
  const double resampled_count = static_cast<double>(nb * block_length);
  for (Index it = 0; it < samples; ++it) {
    double sh = 0, ssum = 0;
    for (Index b = 0; b < nb; ++b) {
      const Index pick = static_cast<Index>(
          mix64(seed + 0x9E3779B97F4A7C15ull * (++ctr)) %
          static_cast<std::uint64_t>(nb));
      sh += hb[static_cast<std::size_t>(pick)];
      if (use_ratio) ssum += sb[static_cast<std::size_t>(pick)];
    }
    draws[static_cast<std::size_t>(it)] =
        use_ratio ? sh / ssum : sh / resampled_count;
  }
  for (Index it = 0; it < samples; ++it) mean += draws[static_cast<std::size_t>(it)];
  mean /= static_cast<double>(samples);
  for (Index it = 0; it < samples; ++it) {
    const double d = draws[static_cast<std::size_t>(it)] - mean;
    m2 += d * d;
  }
  RatioBootstrap out;
  out.blocks = nb;
  out.std_error = std::sqrt(m2 / static_cast<double>(samples));
  return out;
}

}  // namespace

RayleighEstimate rayleigh_coefficient_with_error(
    const Trajectory& traj, const std::function<double(double)>& f, Index lag,
    const RayleighOptions& opts, Index bootstrap_samples,
    std::uint64_t bootstrap_seed) {
  EstimatorOptions eo;
  eo.stride = opts.stride;
  check_estimator_inputs(traj, lag, eo);

  const Index n = traj.size();
  std::vector<double> fx(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k)
    fx[static_cast<std::size_t>(k)] = f(traj.states[static_cast<std::size_t>(k)]);

  const Index pairs = (n - 1 - lag) / opts.stride + 1;
  std::vector<double> h(static_cast<std::size_t>(pairs));
  std::vector<double> s;
  double acc = 0, comp = 0;
  for (Index p = 0; p < pairs; ++p) {
    const Index k = p * opts.stride;
    h[static_cast<std::size_t>(p)] = fx[static_cast<std::size_t>(k)] *
                                     fx[static_cast<std::size_t>(k + lag)];
    kahan_add(acc, comp, h[static_cast<std::size_t>(p)]);
  }
  RayleighEstimate out;
  out.value = acc / static_cast<double>(pairs);
  if (opts.normalize) {
    const Index frames = (n - 1) / opts.stride + 1;
    s.resize(static_cast<std::size_t>(frames));
    double acc2 = 0, comp2 = 0;
    for (Index p = 0; p < frames; ++p) {
      const double v = fx[static_cast<std::size_t>(p * opts.stride)];
      s[static_cast<std::size_t>(p)] = v * v;
      kahan_add(acc2, comp2, s[static_cast<std::size_t>(p)]);
    }
    out.value /= acc2 / static_cast<double>(frames);
  }
  out.block_length = 10 * std::max<Index>(lag, 1);
  const RatioBootstrap rb = bootstrap_ratio(h, s, opts.normalize,
                                            out.block_length,
                                            bootstrap_samples, bootstrap_seed);
  out.std_error = rb.std_error;
  out.blocks = rb.blocks;
  return out;
}

MsmMatrices estimate_msm_transition_matrix(const Trajectory& traj,
                                           const Vector& edges, Index lag,
                                           const MsmOptions& opts) {
  traj.validate();
  if (lag < 1) throw ConfigError("msm lag must be >= 1");
  if (lag >= traj.size())
    throw ConfigError("lag must be smaller than the trajectory length");
  if (edges.size() < 2) throw ConfigError("msm needs >= 2 edges");
  const Index nb = edges.size() - 1;
  const double lo = edges(0), hi = edges(edges.size() - 1);
  const double width0 = edges(1) - edges(0);
  bool uniform = true;
  for (Index i = 1; i < nb; ++i)
    if (std::abs((edges(i + 1) - edges(i)) - width0) > 1e-12 * width0)
      uniform = false;

  auto bin_of = [&](double x) -> Index {
    if (x < lo || x >= hi)
      throw ConfigError("state outside the MSM partition");
    if (uniform) return std::min(static_cast<Index>((x - lo) / width0), nb - 1);
    const double* begin = edges.data();
    return static_cast<Index>(
               std::upper_bound(begin, begin + edges.size(), x) - begin) -
           1;
  };

  Matrix counts = Matrix::Zero(nb, nb);
  const Index n = traj.size();
  Index prev = bin_of(traj.states[0]);
  std::vector<Index> bins(static_cast<std::size_t>(n));
  bins[0] = prev;
  for (Index k = 1; k < n; ++k)
    bins[static_cast<std::size_t>(k)] = bin_of(traj.states[static_cast<std::size_t>(k)]);
  for (Index k = 0; k + lag < n; ++k)
    counts(bins[static_cast<std::size_t>(k)],
           bins[static_cast<std::size_t>(k + lag)]) += 1.0;

  MsmMatrices out;
  out.counts = counts;
  out.counts_sym = opts.symmetrize
                       ? (0.5 * (counts + counts.transpose())).eval()
                       : counts;
  out.symmetrized = opts.symmetrize;
  out.lag = lag;
  out.transition = Matrix::Zero(nb, nb);
  out.pi = Vector::Zero(nb);
  const Vector rowsum = out.counts_sym.rowwise().sum();
  const double total = rowsum.sum();
  for (Index i = 0; i < nb; ++i) {
    if (rowsum(i) > 0.0) {
      out.visited.push_back(i);
      out.transition.row(i) = out.counts_sym.row(i) / rowsum(i);
      out.pi(i) = rowsum(i) / total;
    } else {
      out.unvisited.push_back(i);
    }
  }
  return out;
}

Vector msm_eigenvalues(const MsmMatrices& msm, Index k) {
  const Index nv = static_cast<Index>(msm.visited.size());
  if (nv == 0) throw NumericError("msm has no visited bins");
  if (k > nv) k = nv;
  // Symmetric matrix D^{-1/2} C_sym D^{-1/2} over visited bins is similar
  // to the row-normalized transition matrix, so they share eigenvalues.
  Matrix c(nv, nv);
  for (Index a = 0; a < nv; ++a)
    for (Index b = 0; b < nv; ++b)
      c(a, b) = msm.counts_sym(msm.visited[static_cast<std::size_t>(a)],
                               msm.visited[static_cast<std::size_t>(b)]);
  const Vector d = c.rowwise().sum();
  for (Index a = 0; a < nv; ++a)
    if (!(d(a) > 0.0)) throw NumericError("visited bin with zero row sum");
  const Vector dinv = d.array().sqrt().inverse();
  const Matrix h = dinv.asDiagonal() * c * dinv.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.transpose()));
  if (es.info() != Eigen::Success)
    throw NumericError("msm eigendecomposition failed");
  return es.eigenvalues().reverse().head(k);
}

PencilErrorEstimate pencil_eigenvalue_stderr(
    const Trajectory& traj, const BasisSet& basis, const DensityEstimate& mu,
    Index lag, Index which, const EstimatorOptions& opts,
    Index bootstrap_samples, std::uint64_t bootstrap_seed) {
  const CorrelationMatrices cm =
      estimate_correlation_matrices(traj, basis, mu, lag, opts);
  const SpectralModel model =
      roothaan_hall_solve(cm.H, cm.S, basis, 1.0, RoothaanHallOptions{});
  if (which < 0 || which >= model.size())
    throw ConfigError("pencil_eigenvalue_stderr: eigenvalue index out of range");
  const Vector b = model.coefficients().col(which);

  // First-order: d lambda = b^T (dH - lambda dS) b with b^T S b = 1, i.e.
  // lambda = mean(h-series) / mean(s-series) for the projected scalar
  // u_k = b . w(x_k); bootstrap the paired block means of that ratio.
  const WeightedEvaluator eval(basis, mu);
  const Index n = traj.size();
  Vector row(basis.size());
  std::vector<double> u(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) {
    const bool ok = eval.eval(traj.states[static_cast<std::size_t>(k)], row.data());
    u[static_cast<std::size_t>(k)] = ok ? b.dot(row) : 0.0;
  }
  const Index pairs = (n - 1 - lag) / opts.stride + 1;
  const Index frames = (n - 1) / opts.stride + 1;
  std::vector<double> h(static_cast<std::size_t>(pairs));
  std::vector<double> s(static_cast<std::size_t>(frames));
  for (Index p = 0; p < pairs; ++p) {
    const Index k = p * opts.stride;
    h[static_cast<std::size_t>(p)] = u[static_cast<std::size_t>(k)] *
                                     u[static_cast<std::size_t>(k + lag)];
  }
  for (Index p = 0; p < frames; ++p) {
    const double v = u[static_cast<std::size_t>(p * opts.stride)];
    s[static_cast<std::size_t>(p)] = v * v;
  }
  PencilErrorEstimate out;
  out.lambda = model.eigenvalues()(which);
  out.block_length = 10 * std::max<Index>(lag, 1);
  const RatioBootstrap rb = bootstrap_ratio(h, s, true, out.block_length,
                                            bootstrap_samples, bootstrap_seed);
  out.std_error = rb.std_error;
  out.blocks = rb.blocks;
  return out;
}

}  // namespace slowspec
