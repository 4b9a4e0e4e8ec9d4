#pragma once

#include <functional>
#include <string>
#include <vector>

#include "slowspec/basis.hpp"
#include "slowspec/density.hpp"
#include "slowspec/trajectory.hpp"
#include "slowspec/types.hpp"

namespace slowspec {

struct EstimatorOptions {
  bool symmetrize = true;  ///< H <- (H + H^T)/2 (reversibility)
  Index stride = 1;        ///< >1 selects non-overlapping strided pairs
  /// Fraction of zero-density frames above which estimation fails.
  double max_skipped_fraction = 0.01;
};

/// Time-lagged density matrix H and overlap matrix S over a basis.
///
/// h_ij = (1/n_pairs) sum_k w_i(x_k) w_j(x_{k+m}),
/// s_ij = (1/n_frames) sum_k w_i(x_k) w_j(x_k),
/// where w_i = mu-hat^{-1/2} phi_i are the weighted basis values (for the
/// indicator family the mu-hat^{1/2} factor cancels analytically).  Frames in
/// zero-density bins are skipped and counted.  Accumulation is blocked with
/// compensated summation in fixed block order, so results are
/// bit-reproducible.
struct CorrelationMatrices {
  Matrix H;
  Matrix S;
  Index lag = 0;
  Index frames_used = 0;  ///< lagged pairs entering H
  std::string basis_id;
  bool symmetrized = false;
  Index skipped_frames = 0;
};

CorrelationMatrices estimate_correlation_matrices(const Trajectory& traj,
                                                  const BasisSet& basis,
                                                  const DensityEstimate& mu,
                                                  Index lag,
                                                  const EstimatorOptions& = {});

Matrix estimate_H(const Trajectory& traj, const BasisSet& basis,
                  const DensityEstimate& mu, Index lag,
                  const EstimatorOptions& = {});
/// Exactly the lag-0 H matrix (estimate_H(..., 0) shares the code path).
Matrix estimate_S(const Trajectory& traj, const BasisSet& basis,
                  const DensityEstimate& mu, const EstimatorOptions& = {});

struct RayleighOptions {
  /// Divide by the sampled <f, f>_mu-hat = (1/N) sum f(x_k)^2.
  bool normalize = false;
  Index stride = 1;
};

/// Sampled autocorrelation (1/(N-m)) sum_k f(x_k) f(x_{k+m}) of a test
/// function; with f = mu-hat^{-1/2} phi-hat this is the Rayleigh coefficient
/// estimate bounded above by the corresponding eigenvalue.
double rayleigh_coefficient(const Trajectory& traj,
                            const std::function<double(double)>& f, Index lag,
                            const RayleighOptions& = {});

struct RayleighEstimate {
  double value = 0;
  double std_error = 0;
  Index blocks = 0;
  Index block_length = 0;
};

/// rayleigh_coefficient plus a circular block-bootstrap standard error
/// (block length 10 x lag, blocks on a fixed partition with wraparound).
RayleighEstimate rayleigh_coefficient_with_error(
    const Trajectory& traj, const std::function<double(double)>& f, Index lag,
    const RayleighOptions& = {}, Index bootstrap_samples = 200,
    std::uint64_t bootstrap_seed = 1);

struct MsmOptions {
  bool symmetrize = true;  ///< C <- (C + C^T)/2 before row normalization
};

/// Count and transition matrices of the indicator-partition Markov state
/// model.  Rows of T over visited bins sum to 1; never-visited bins are
/// flagged and left as zero rows.
struct MsmMatrices {
  Matrix counts;      ///< raw joint counts c_ij
  Matrix counts_sym;  ///< symmetrized counts used for T and pi
  Matrix transition;
  Vector pi;  ///< stationary weights from symmetrized row sums
  Index lag = 0;
  bool symmetrized = false;
  std::vector<Index> visited;
  std::vector<Index> unvisited;
};

MsmMatrices estimate_msm_transition_matrix(const Trajectory& traj,
                                           const Vector& edges, Index lag,
                                           const MsmOptions& = {});

/// Leading eigenvalues of the MSM on its visited set, computed from the
/// symmetric similar matrix D^{-1/2} C_sym D^{-1/2}.
Vector msm_eigenvalues(const MsmMatrices& msm, Index k);

struct PencilErrorEstimate {
  double lambda = 0;
  double std_error = 0;
  Index blocks = 0;
  Index block_length = 0;
};

/// Block-bootstrap standard error of the which-th generalized eigenvalue of
/// the estimated (H, S) pencil, via the first-order expansion
/// d lambda = b^T (dH - lambda dS) b around the solved eigenpair.
PencilErrorEstimate pencil_eigenvalue_stderr(
    const Trajectory& traj, const BasisSet& basis, const DensityEstimate& mu,
    Index lag, Index which, const EstimatorOptions& = {},
    Index bootstrap_samples = 200, std::uint64_t bootstrap_seed = 1);

}  // namespace slowspec
