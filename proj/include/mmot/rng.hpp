#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace mmot {

// Helpers on top of mt19937_64. The std distributions are implementation
// defined, so everything that must be reproducible from a seed goes through
// these instead.
namespace rng {

inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
  return lo + (hi - lo) * uniform01(gen);
}

// Box-Muller, one value per call (the sibling value is discarded to keep the
// draw count predictable).
inline double normal(std::mt19937_64& gen) {
  double u1 = uniform01(gen);
  while (u1 <= 0.0) u1 = uniform01(gen);
  const double u2 = uniform01(gen);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

inline std::uint64_t below(std::mt19937_64& gen, std::uint64_t bound) {
  // Rejection sampling to avoid modulo bias.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x = gen();
  while (x >= limit) x = gen();
  return x % bound;
}

template <typename T>
inline void shuffle(std::vector<T>& v, std::mt19937_64& gen) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(below(gen, i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace rng
}  // namespace mmot
