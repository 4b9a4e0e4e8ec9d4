#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "slowspec/basis.hpp"
#include "slowspec/types.hpp"

namespace slowspec {

struct SolverInfo {
  std::string method;        // "ritz" | "roothaan-hall" | "roothaan-hall-truncated"
  Index input_size = 0;
  Index retained_rank = 0;   // < input_size when S was rank-deficient
  bool truncated = false;
  double pencil_residual = 0;   // max|H B - S B Lambda|
  double symmetry_defect = 0;   // max|H - H^T| of the input
};

/// Eigenvalues and basis-expansion coefficients of a solved (H, S) pencil.
///
/// Columns of coefficients() are S-orthonormal (B^T S B = I, with S = I for
/// the Ritz case), eigenvalues are sorted non-ascending, and each column's
/// largest-magnitude coefficient is positive, so identical inputs produce
/// identical models.
class SpectralModel {
 public:
  SpectralModel(Vector eigenvalues, Matrix coefficients, BasisSet basis,
                double lag_time, SolverInfo info);

  Index size() const { return eigenvalues_.size(); }
  const Vector& eigenvalues() const { return eigenvalues_; }
  const Matrix& coefficients() const { return coefficients_; }
  const BasisSet& basis() const { return basis_; }
  double lag_time() const { return lag_time_; }
  const SolverInfo& info() const { return info_; }

  /// Model value sum_j B(j, i) chi_j(x) in the basis's native convention
  /// (for the indicator family this is the mu^{-1/2}-weighted staircase).
  double eval(Index i, double x) const;

  /// Unweighted model r-hat_i(x) = phi-hat_i(x) / phi-hat_1(x); the implicit
  /// density factors cancel, so this is convention-free.  Throws when
  /// |phi-hat_1(x)| falls below the threshold.
  double eval_weighted(Index i, double x, double threshold = 1e-12) const;

  nlohmann::json to_json() const;
  static SpectralModel from_json(const nlohmann::json& j);

  /// CSV table x, phi_1(x), ..., phi_k(x) on the given grid (half-weighted
  /// values; indicator models are multiplied by sqrt(mu) from the potential
  /// when one is supplied, else written in native convention).
  void write_eigenfunction_table(const std::filesystem::path& path,
                                 const Grid& grid,
                                 const PotentialSpec* p = nullptr) const;

 private:
  Vector eigenvalues_;
  Matrix coefficients_;
  BasisSet basis_;
  double lag_time_ = 0;
  SolverInfo info_;
};

/// Standard symmetric Ritz problem H B = B Lambda for an orthonormal basis.
/// H must be symmetric within 1e-8 relative (then symmetrized exactly).
SpectralModel ritz_solve(const Matrix& H, BasisSet basis, double tau);

struct RoothaanHallOptions {
  /// Relative eigenvalue threshold for spectral truncation of a
  /// non-positive-definite S.
  double truncation_rel_threshold = 1e-10;
  /// Overlap entries below this are treated as exact zeros before
  /// factorization.
  double overlap_cutoff = 1e-12;
};

/// Generalized symmetric-definite pencil H B = S B Lambda via Cholesky
/// reduction S = L L^T.  When S is not positive definite, falls back to
/// spectral truncation: eigendirections of S below the relative threshold
/// are dropped, the pencil is solved in the retained subspace, and the
/// retained rank is reported in SolverInfo.
SpectralModel roothaan_hall_solve(const Matrix& H, const Matrix& S,
                                  BasisSet basis, double tau,
                                  const RoothaanHallOptions& = {});

struct Timescale {
  double value = 0;
  bool finite = true;
};

/// t = -tau / ln(lambda); lambda >= 1 yields the infinity sentinel with
/// finite = false; lambda <= 0 has no real rate and throws.
Timescale implied_timescale(double lambda, double tau);

}  // namespace slowspec
