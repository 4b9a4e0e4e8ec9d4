#pragma once

#include "slowspec/trajectory.hpp"

namespace slowspec {

struct SimulateOptions {
  Index stride = 1;      ///< record every stride-th step
  double guard = 100.0;  ///< |x| beyond this aborts with a divergence error
};

/// Euler-discretized Smoluchowski step x_{k+1} = x_k + dt f(x_k)
/// + sqrt(2 dt) eta_k with eta_k i.i.d. standard normals from a
/// counter-based stream, so the result is bit-reproducible for a fixed
/// (seed, build) and independent of chunking.
///
/// Records n_steps/stride + 1 frames (n_steps must be divisible by stride);
/// the stored frame spacing is dt * stride.  Throws NumericError
/// "trajectory diverged at step k" if |x| exceeds the guard domain.
Trajectory simulate(const PotentialSpec& p, double x0, double dt,
                    Index n_steps, std::uint64_t seed,
                    const SimulateOptions& opts = {});

}  // namespace slowspec
