#include "slowspec/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "slowspec/io.hpp"

namespace slowspec {

namespace {

// Descending eigenvalue order plus the deterministic sign convention:
// the largest-magnitude coefficient of every column is made positive
// (first occurrence wins on exact ties).
void order_and_fix_signs(Vector& lambda, Matrix& b) {
  const Index m = lambda.size();
  std::vector<Index> perm(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) perm[static_cast<std::size_t>(i)] = i;
  std::stable_sort(perm.begin(), perm.end(),
                   [&](Index a, Index c) { return lambda(a) > lambda(c); });
  Vector ls(m);
  Matrix bs(b.rows(), m);
  for (Index i = 0; i < m; ++i) {
    ls(i) = lambda(perm[static_cast<std::size_t>(i)]);
    bs.col(i) = b.col(perm[static_cast<std::size_t>(i)]);
  }
  for (Index i = 0; i < m; ++i) {
    Index arg = 0;
    double best = -1.0;
    for (Index j = 0; j < bs.rows(); ++j) {
      const double a = std::abs(bs(j, i));
      if (a > best) {
        best = a;
        arg = j;
      }
    }
    if (bs(arg, i) < 0.0) bs.col(i) = -bs.col(i);
  }
  lambda = std::move(ls);
  b = std::move(bs);
}

double symmetry_defect(const Matrix& h) {
  const double scale = h.array().abs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (h - h.transpose()).array().abs().maxCoeff() / scale;
}

}  // namespace

SpectralModel::SpectralModel(Vector eigenvalues, Matrix coefficients,
                             BasisSet basis, double lag_time, SolverInfo info)
    : eigenvalues_(std::move(eigenvalues)),
      coefficients_(std::move(coefficients)),
      basis_(std::move(basis)),
      lag_time_(lag_time),
      info_(std::move(info)) {}

double SpectralModel::eval(Index i, double x) const {
  if (i < 0 || i >= size()) throw ConfigError("eval: eigenfunction index");
  const Vector chi = basis_.eval(x);
  return coefficients_.col(i).dot(chi);
}

double SpectralModel::eval_weighted(Index i, double x, double threshold) const {
  const double denom = eval(0, x);
  if (std::abs(denom) < threshold)
    throw NumericError("undefined outside density support");
  return eval(i, x) / denom;
}

nlohmann::json SpectralModel::to_json() const {
  nlohmann::json j;
  j["eigenvalues"] = std::vector<double>(
      eigenvalues_.data(), eigenvalues_.data() + eigenvalues_.size());
  j["coefficients"] = matrix_to_json(coefficients_);
  j["basis"] = basis_.to_json();
  j["lag_time"] = lag_time_;
  j["solver"] = {{"method", info_.method},
                 {"input_size", info_.input_size},
                 {"retained_rank", info_.retained_rank},
                 {"truncated", info_.truncated},
                 {"pencil_residual", info_.pencil_residual},
                 {"symmetry_defect", info_.symmetry_defect}};
  return j;
}

SpectralModel SpectralModel::from_json(const nlohmann::json& j) {
  const auto& ev = j.at("eigenvalues");
  Vector lambda(ev.size());
  for (Index i = 0; i < lambda.size(); ++i)
    lambda(i) = ev[static_cast<std::size_t>(i)].get<double>();
  Matrix b = matrix_from_json(j.at("coefficients"));
  BasisSet basis = BasisSet::from_json(j.at("basis"));
  SolverInfo info;
  const auto& s = j.at("solver");
  info.method = s.at("method").get<std::string>();
  info.input_size = s.at("input_size").get<Index>();
  info.retained_rank = s.at("retained_rank").get<Index>();
  info.truncated = s.at("truncated").get<bool>();
  info.pencil_residual = s.at("pencil_residual").get<double>();
  info.symmetry_defect = s.at("symmetry_defect").get<double>();
  return SpectralModel(std::move(lambda), std::move(b), std::move(basis),
                       j.at("lag_time").get<double>(), std::move(info));
}

void SpectralModel::write_eigenfunction_table(
    const std::filesystem::path& path, const Grid& grid,
    const PotentialSpec* p) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << "x";
  for (Index i = 0; i < size(); ++i) out << ",phi" << (i + 1);
  out << '\n';
  const bool lift = basis_.implicit_half_weight() && p != nullptr;
  for (Index g = 0; g < grid.n; ++g) {
    const double x = grid.nodes(g);
    const Vector chi = basis_.eval(x);
    const double factor = lift ? std::sqrt(p->stationary_density(x)) : 1.0;
    out << format_g17(x);
    for (Index i = 0; i < size(); ++i)
      out << ',' << format_g17(coefficients_.col(i).dot(chi) * factor);
    out << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

SpectralModel ritz_solve(const Matrix& H, BasisSet basis, double tau) {
  if (H.rows() != H.cols()) throw ConfigError("ritz_solve: H must be square");
  if (H.rows() != basis.size())
    throw ConfigError("ritz_solve: H size does not match the basis");
  SolverInfo info;
  info.method = "ritz";
  info.input_size = H.rows();
  info.retained_rank = H.rows();
  info.symmetry_defect = symmetry_defect(H);
  if (info.symmetry_defect > 1e-8)
    throw ConfigError("ritz_solve: H is not symmetric");
  const Matrix hs = 0.5 * (H + H.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> es(hs);
  if (es.info() != Eigen::Success)
    throw NumericError("ritz_solve: eigendecomposition failed");
  Vector lambda = es.eigenvalues();
  Matrix b = es.eigenvectors();
  order_and_fix_signs(lambda, b);
  info.pencil_residual =
      (hs * b - b * lambda.asDiagonal()).array().abs().maxCoeff();
  return SpectralModel(std::move(lambda), std::move(b), std::move(basis), tau,
                       std::move(info));
}

SpectralModel roothaan_hall_solve(const Matrix& H, const Matrix& S,
                                  BasisSet basis, double tau,
                                  const RoothaanHallOptions& opts) {
  if (H.rows() != H.cols() || S.rows() != S.cols() || H.rows() != S.rows())
    throw ConfigError("roothaan_hall_solve: H and S must be square and equal size");
  if (H.rows() != basis.size())
    throw ConfigError("roothaan_hall_solve: size does not match the basis");
  if (symmetry_defect(S) > 1e-8)
    throw ConfigError("roothaan_hall_solve: S is not symmetric");

  SolverInfo info;
  info.input_size = H.rows();
  info.symmetry_defect = symmetry_defect(H);
  const Matrix hs = 0.5 * (H + H.transpose());
  Matrix ss = 0.5 * (S + S.transpose());
  if (opts.overlap_cutoff > 0.0)
    for (Index j = 0; j < ss.cols(); ++j)
      for (Index i = 0; i < ss.rows(); ++i)
        if (std::abs(ss(i, j)) < opts.overlap_cutoff) ss(i, j) = 0.0;

  Vector lambda;
  Matrix b;
  Eigen::LLT<Matrix> llt(ss);
  if (llt.info() == Eigen::Success) {
    info.method = "roothaan-hall";
    info.retained_rank = ss.rows();
    // L^{-1} H L^{-T}: two triangular solves keep the problem symmetric.
    const Matrix l = llt.matrixL();
    Matrix y = l.triangularView<Eigen::Lower>().solve(hs);
    y = l.triangularView<Eigen::Lower>()
            .solve(y.transpose())
            .transpose()
            .eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (y + y.transpose()));
    if (es.info() != Eigen::Success)
      throw NumericError("roothaan_hall_solve: eigendecomposition failed");
    lambda = es.eigenvalues();
    b = l.transpose().triangularView<Eigen::Upper>().solve(es.eigenvectors());
  } else {
    // Spectral truncation of a rank-deficient overlap: keep eigendirections
    // above the relative threshold and solve in the retained subspace.
    info.method = "roothaan-hall-truncated";
    info.truncated = true;
    Eigen::SelfAdjointEigenSolver<Matrix> se(ss);
    if (se.info() != Eigen::Success)
      throw NumericError("roothaan_hall_solve: overlap eigendecomposition failed");
    const double cutoff =
        opts.truncation_rel_threshold * se.eigenvalues().maxCoeff();
    std::vector<Index> keep;
    for (Index i = 0; i < se.eigenvalues().size(); ++i)
      if (se.eigenvalues()(i) > cutoff) keep.push_back(i);
    info.retained_rank = static_cast<Index>(keep.size());
    if (keep.empty())
      throw NumericError("roothaan_hall_solve: overlap matrix has rank 0");
    Matrix w(ss.rows(), info.retained_rank);
    for (Index i = 0; i < info.retained_rank; ++i)
      w.col(i) = se.eigenvectors().col(keep[static_cast<std::size_t>(i)]) /
                 std::sqrt(se.eigenvalues()(keep[static_cast<std::size_t>(i)]));
    const Matrix reduced = w.transpose() * hs * w;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (reduced + reduced.transpose()));
    if (es.info() != Eigen::Success)
      throw NumericError("roothaan_hall_solve: eigendecomposition failed");
    lambda = es.eigenvalues();
    b = w * es.eigenvectors();
  }
  order_and_fix_signs(lambda, b);
  info.pencil_residual =
      (hs * b - ss * b * lambda.asDiagonal()).array().abs().maxCoeff();
  return SpectralModel(std::move(lambda), std::move(b), std::move(basis), tau,
                       std::move(info));
}

Timescale implied_timescale(double lambda, double tau) {
  if (!(lambda > 0.0))
    throw NumericError("negative eigenvalue has no implied timescale");
  if (lambda >= 1.0)
    return {std::numeric_limits<double>::infinity(), false};
  return {-tau / std::log(lambda), true};
}

}  // namespace slowspec
