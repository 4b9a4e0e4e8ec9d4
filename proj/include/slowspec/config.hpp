#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "slowspec/basis.hpp"
#include "slowspec/potential.hpp"
#include "slowspec/types.hpp"

namespace slowspec {

enum class SolverChoice { Ritz, RoothaanHall, Msm };
enum class EstimatorMode { Trajectory, Quadrature };

/// Validated experiment description; the unit of reproducibility for the
/// CLI.  JSON schema carries a "schema_version" field (currently 1).
struct ExperimentConfig {
  int schema_version = 1;
  PotentialSpec potential = PotentialSpec::flat();

  // simulation
  double x0 = 0.0;
  double dt = 1e-3;
  Index n_steps = 0;
  std::uint64_t seed = 1;
  Index stride = 1;
  double guard = 100.0;
  bool write_trajectory_csv = false;

  // estimation
  EstimatorMode estimator = EstimatorMode::Quadrature;
  std::optional<BasisSet> basis;
  /// Indicator basis declared without weights; pi is derived at run time
  /// (grid quadrature of mu for the quadrature pipeline, the mu-hat
  /// estimate for the trajectory pipeline).
  Vector indicator_edges;
  std::vector<Index> lags;  ///< frame lags (trajectory) / lag multipliers (quadrature)
  double mu_lo = 0, mu_hi = 0;
  Index mu_bins = 0;
  Index msm_bins = 0;  ///< 0 disables the MSM side
  SolverChoice solver = SolverChoice::Ritz;
  bool symmetrize = true;

  // reference grid
  double grid_lo = -7.0, grid_hi = 7.0;
  Index grid_n = 1401;
  double tau = 0.025;  ///< base lag time for quadrature/reference
  Index reference_k = 5;

  // nonlinear scan
  double scan_y_min = 0.2, scan_y_max = 3.0;
  double scan_s_min = 0.2, scan_s_max = 3.0;
  Index scan_points = 41;

  // compare
  double bound_tolerance = 1e-6;

  std::filesystem::path out_dir = ".";
  std::filesystem::path trajectory_file;  ///< input for trajectory estimation

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::filesystem::path& path);
  /// Named presets: doublewell-msm20, doublewell-hermite20,
  /// doublewell-gauss11, quartic-gauss13.
  static ExperimentConfig preset(const std::string& name);
  static std::vector<std::string> preset_names();

  nlohmann::json to_json() const;
};

// Exit codes: 0 success, 2 config error, 3 numerical failure, 4 variational
// bound violation (cmd_compare only).
int run_simulate(const ExperimentConfig& cfg, std::ostream& log);
int run_estimate(const ExperimentConfig& cfg, std::ostream& log);
int run_reference(const ExperimentConfig& cfg, std::ostream& log);
int run_scan(const ExperimentConfig& cfg, std::ostream& log);
int run_compare(const std::vector<std::filesystem::path>& model_files,
                const std::filesystem::path& reference_file,
                double bound_tolerance, const std::filesystem::path& out_dir,
                std::ostream& log);

}  // namespace slowspec
