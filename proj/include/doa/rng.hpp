#pragma once

#include <cmath>
#include <cstdint>

#include "doa/common.hpp"

namespace doa {

/// SplitMix64 generator. Fixed algorithm (no library distributions) so that
/// seeded experiments replay bit-identically and per-trial seeds can be
/// derived by mixing instead of sequential draws.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform on (0, 1]; never returns 0 so log() below is safe.
  double uniform_pos() {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Standard complex circularly-symmetric Gaussian, E|z|^2 = 1.
  cplx gaussian() {
    const double u1 = uniform_pos();
    const double u2 = uniform_pos();
    const double r = std::sqrt(-std::log(u1));  // Box-Muller, halved power
    return {r * std::cos(2.0 * kPi * u2), r * std::sin(2.0 * kPi * u2)};
  }

  /// Unit-modulus sample with uniform phase, |z| = 1.
  cplx unit_phase() {
    const double phi = 2.0 * kPi * uniform_pos();
    return {std::cos(phi), std::sin(phi)};
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Stable per-trial seed from (master seed, grid index, trial index).
/// Order-free derivation keeps parallel sweeps independent of scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t grid_index,
                                 std::uint64_t trial_index) {
  std::uint64_t h = master;
  h = mix64(h ^ (0x9E3779B97F4A7C15ULL * (grid_index + 1)));
  h = mix64(h ^ (0xC2B2AE3D27D4EB4FULL * (trial_index + 1)));
  return h;
}

}  // namespace doa
