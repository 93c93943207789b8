#pragma once

// Seeded randomness helpers. std::mt19937_64 has a standard-specified output
// sequence, but the standard distributions do not, so the value mappings are
// spelled out here to keep seeded runs reproducible across toolchains.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace lanekit {

/// Uniform double in [0,1), 53-bit resolution.
inline double uniform_double(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo, hi).
inline double uniform_range(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * uniform_double(g);
}

/// Uniform index in [0, n). n must be > 0. The modulo mapping has a bias of
/// at most n / 2^64, irrelevant at the sizes used here.
inline std::size_t uniform_index(std::mt19937_64& g, std::size_t n) {
  return static_cast<std::size_t>(g() % static_cast<std::uint64_t>(n));
}

/// Gaussian sample via Box-Muller. Uses two engine draws per call, no cached
/// spare, so consumption per call is fixed.
inline double normal(std::mt19937_64& g, double mean, double sd) {
  const double u1 = 1.0 - uniform_double(g);  // (0,1]
  const double u2 = uniform_double(g);
  const double r = std::sqrt(-2.0 * std::log(u1));
  return mean + sd * r * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace lanekit
