#pragma once

#include <cmath>
#include <cstdint>

namespace kernbound {

// Stateless counter-based generator: every draw is a pure function of
// (seed, stream, counter), so parallel schedules cannot change results.

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t counter_word(std::uint64_t seed, std::uint64_t stream,
                                  std::uint64_t counter) {
  std::uint64_t h = mix64(seed ^ 0x5851f42d4c957f2dull);
  h = mix64(h ^ stream);
  return mix64(h ^ counter);
}

// Uniform double in [0, 1) from the top 53 bits.
inline double counter_uniform(std::uint64_t seed, std::uint64_t stream,
                              std::uint64_t counter) {
  return static_cast<double>(counter_word(seed, stream, counter) >> 11) *
         0x1.0p-53;
}

// Standard normal via Box-Muller on two counter draws.
inline double counter_normal(std::uint64_t seed, std::uint64_t stream,
                             std::uint64_t counter) {
  double u1 = counter_uniform(seed, stream, 2 * counter);
  double u2 = counter_uniform(seed, stream, 2 * counter + 1);
  double r = std::sqrt(-2.0 * std::log1p(-u1));
  return r * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace kernbound
