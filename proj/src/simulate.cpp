#include "slowspec/simulate.hpp"

#include <cmath>
#include <string>

#include "slowspec/rng.hpp"

namespace slowspec {

Trajectory simulate(const PotentialSpec& p, double x0, double dt,
                    Index n_steps, std::uint64_t seed,
                    const SimulateOptions& opts) {
  if (!(dt > 0.0)) throw ConfigError("simulate: dt must be positive");
  if (n_steps < 1) throw ConfigError("simulate: n_steps must be >= 1");
  if (opts.stride < 1) throw ConfigError("simulate: stride must be >= 1");
  if (n_steps % opts.stride != 0)
    throw ConfigError("simulate: n_steps must be divisible by stride");
  if (!std::isfinite(x0) || std::abs(x0) > opts.guard)
    throw ConfigError("simulate: x0 outside the guard domain");

  const NormalStream noise(seed);
  const double amp = std::sqrt(2.0 * dt);

  Trajectory traj;
  traj.dt = dt * static_cast<double>(opts.stride);
  traj.seed = seed;
  traj.potential = p;
  traj.states.reserve(static_cast<std::size_t>(n_steps / opts.stride) + 1);
  traj.states.push_back(x0);

  double x = x0;
  for (Index k = 0; k < n_steps; ++k) {
    x += dt * p.force(x) + amp * noise.normal(static_cast<std::uint64_t>(k));
    if (!(std::abs(x) <= opts.guard))
      throw NumericError("trajectory diverged at step " + std::to_string(k + 1));
    if ((k + 1) % opts.stride == 0) traj.states.push_back(x);
  }
  return traj;
}

}  // namespace slowspec
