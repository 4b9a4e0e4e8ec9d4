#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "slowspec/potential.hpp"
#include "slowspec/types.hpp"

namespace slowspec {

/// A uniformly time-sampled scalar trajectory.
struct Trajectory {
  std::vector<double> states;
  double dt = 0.0;  ///< time per recorded frame
  std::uint64_t seed = 0;
  std::optional<PotentialSpec> potential;

  Index size() const { return static_cast<Index>(states.size()); }

  /// Throws unless states are non-empty and finite and dt > 0.
  void validate() const;
};

/// Binary trajectory file: magic "SLOWTRAJ", little-endian u32 version = 1,
/// u64 frame count, f64 dt, u64 seed, then frame count f64 states.
void write_slowtraj(const std::filesystem::path& path, const Trajectory& t);
Trajectory read_slowtraj(const std::filesystem::path& path);

/// CSV export, one state per line with header "x".
void write_states_csv(const std::filesystem::path& path, const Trajectory& t);

}  // namespace slowspec
