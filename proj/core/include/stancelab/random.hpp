#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace stancelab {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Independent stream for (seed, key); used for per-node and per-component RNGs.
inline Rng derive_rng(std::uint64_t seed, std::uint64_t key) {
  return Rng(splitmix64(seed ^ splitmix64(key)));
}

inline Rng derive_rng(std::uint64_t seed, std::string_view key) {
  return derive_rng(seed, fnv1a(key));
}

// Portable uniform in [0,1); std::uniform_real_distribution is library-specific.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
}

inline double standard_normal(Rng& rng) {
  // Box-Muller; u1 kept away from zero.
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace stancelab
