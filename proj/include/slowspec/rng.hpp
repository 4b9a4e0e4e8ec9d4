#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace slowspec {

// SplitMix64 output function (Steele/Lea/Flood finalizer).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Counter-based stream of standard normals keyed by (seed, index).
///
/// Value i of the stream is a pure function of (seed, i), so disjoint index
/// ranges can be generated in any order or in parallel and still reproduce
/// the serial sequence bit for bit.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Uniform in (0, 1]; never returns 0 so log() below is safe.
  double uniform(std::uint64_t k) const {
    const std::uint64_t bits = mix64(seed_ + (k + 1) * kGamma);
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
  }

  /// k-th standard normal via Box-Muller on two counter values.
  double normal(std::uint64_t k) const {
    const double u1 = uniform(2 * k);
    const double u2 = uniform(2 * k + 1);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
  std::uint64_t seed_;
};

}  // namespace slowspec
