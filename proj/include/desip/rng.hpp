#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

// Deterministic sampling helpers. std::mt19937_64 has a standard-specified
// stream, but the std:: distributions do not, so anything that must be
// reproducible across compilers draws through these instead.

namespace desip {

using RngEngine = std::mt19937_64;

inline RngEngine make_rng(std::uint64_t seed) { return RngEngine(seed); }

// Derive an independent stream for a sub-task (splitmix64 on seed ^ tag).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed ^ (tag * 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Unbiased integer in [0, n). Rejection sampling on the raw 64-bit stream.
inline std::uint64_t uniform_index(RngEngine& g, std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = g();
  } while (x >= limit);
  return x % n;
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(RngEngine& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller on the portable uniform stream.
inline double normal_unit(RngEngine& g) {
  double u1;
  do {
    u1 = uniform_unit(g);
  } while (u1 <= 0.0);
  const double u2 = uniform_unit(g);
  const double two_pi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

// Fisher-Yates with the portable index sampler.
template <typename T>
void shuffle(std::vector<T>& v, RngEngine& g) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(uniform_index(g, i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace desip
