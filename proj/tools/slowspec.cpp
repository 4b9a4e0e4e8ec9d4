#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "slowspec/config.hpp"
#include "slowspec/types.hpp"

namespace {

namespace fs = std::filesystem;
using slowspec::ExperimentConfig;

ExperimentConfig load_config(const std::string& config_file,
                             const std::string& preset,
                             const std::string& out_dir) {
  ExperimentConfig cfg;
  if (!preset.empty() && !config_file.empty())
    throw slowspec::ConfigError("--config and --preset are exclusive");
  if (!preset.empty())
    cfg = ExperimentConfig::preset(preset);
  else if (!config_file.empty())
    cfg = ExperimentConfig::from_file(config_file);
  else
    throw slowspec::ConfigError("one of --config or --preset is required");
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slowspec: variational spectral estimation for metastable "
               "1D stochastic dynamics"};
  app.require_subcommand(1);

  std::string config_file, preset, out_dir;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_file, "JSON experiment config");
    cmd->add_option("--preset", preset,
                    "named preset (doublewell-msm20, doublewell-hermite20, "
                    "doublewell-gauss11, quartic-gauss13)");
    cmd->add_option("--out", out_dir, "output directory");
  };

  CLI::App* c_sim = app.add_subcommand("simulate", "generate a trajectory file");
  add_common(c_sim);
  CLI::App* c_est = app.add_subcommand(
      "estimate", "estimate mu, H, S and solve for a spectral model");
  add_common(c_est);
  CLI::App* c_ref = app.add_subcommand(
      "reference", "deterministic grid-reference spectrum");
  add_common(c_ref);
  CLI::App* c_scan = app.add_subcommand(
      "scan", "nonlinear two-Gaussian ansatz scan and optimization");
  add_common(c_scan);

  CLI::App* c_cmp = app.add_subcommand(
      "compare", "compare spectral models against a reference spectrum");
  std::vector<std::string> model_files;
  std::string reference_file, cmp_out = ".";
  double bound_tolerance = 1e-6;
  c_cmp->add_option("models", model_files, "model JSON files")->required();
  c_cmp->add_option("--reference", reference_file, "reference.json file")
      ->required();
  c_cmp->add_option("--tolerance", bound_tolerance,
                    "variational bound tolerance");
  c_cmp->add_option("--out", cmp_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_cmp->parsed()) {
      std::vector<fs::path> models(model_files.begin(), model_files.end());
      return slowspec::run_compare(models, reference_file, bound_tolerance,
                                   cmp_out, std::cout);
    }
    const ExperimentConfig cfg = load_config(config_file, preset, out_dir);
    if (c_sim->parsed()) return slowspec::run_simulate(cfg, std::cout);
    if (c_est->parsed()) return slowspec::run_estimate(cfg, std::cout);
    if (c_ref->parsed()) return slowspec::run_reference(cfg, std::cout);
    if (c_scan->parsed()) return slowspec::run_scan(cfg, std::cout);
  } catch (const slowspec::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
