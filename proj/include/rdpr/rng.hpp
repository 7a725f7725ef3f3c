#pragma once

// Counter-based random numbers: every draw is a pure function of
// (key, counter), so results do not depend on evaluation order.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace rdpr {

/// SplitMix64 finalizer; a bijection on 64-bit integers.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash2(std::uint64_t key, std::uint64_t counter) {
  return mix64(key ^ mix64(counter ^ 0x632be59bd9b4e019ULL));
}

/// Uniform on the open interval (0, 1).
inline double uniform_open(std::uint64_t key, std::uint64_t counter) {
  return (static_cast<double>(hash2(key, counter) >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on two uniforms drawn from counters
/// 2k and 2k + 1.
inline double normal_at(std::uint64_t key, std::uint64_t k) {
  const double u1 = uniform_open(key, 2 * k);
  const double u2 = uniform_open(key, 2 * k + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Independent stream key for a named purpose.
constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t purpose) {
  return mix64(seed ^ mix64(purpose));
}

}  // namespace rdpr
