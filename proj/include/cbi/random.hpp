#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cbi {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept
{
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Independent sub-stream `index` of `domain` under a master seed.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t domain, std::uint64_t index) noexcept
{
  return splitmix64(splitmix64(seed ^ splitmix64(domain)) + index);
}

// The standard distributions are implementation-defined; these are not, so
// seeded output is the same on every platform.

__extension__ using u128 = unsigned __int128;

/// Uniform integer in [0, bound), bound > 0 (Lemire's rejection method).
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound)
{
  std::uint64_t x = rng();
  u128 m = static_cast<u128>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = rng();
      m = static_cast<u128>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng)
{
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal draw (Box-Muller, one value per call).
inline double standard_normal(Rng& rng)
{
  double u1 = uniform01(rng);
  while (u1 <= 0.0)
    u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

} // namespace cbi
