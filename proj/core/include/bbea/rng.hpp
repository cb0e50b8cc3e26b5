#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace bbea {

using Rng = std::mt19937_64;

// splitmix64; used to derive independent stream seeds from one master seed.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// One stream per (consumer, iteration). Re-deriving per iteration keeps the
// streams independent: toggling one consumer on or off never shifts the draws
// seen by another.
inline Rng make_stream(std::uint64_t master_seed, std::uint64_t tag, std::uint64_t n = 0) {
  return Rng(mix64(master_seed ^ mix64(tag ^ mix64(n))));
}

// Uniform integer in [0, n) by rejection; avoids the implementation-defined
// behavior of std::uniform_int_distribution so seeded runs replay exactly.
inline std::uint64_t rand_below(Rng& rng, std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % n;
}

// Uniform double in [0, 1) with 53 random bits.
inline double rand_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double rand_range(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * rand_unit(rng);
}

// Box-Muller; one value per call (the twin is discarded to keep the
// draw count predictable).
inline double rand_normal(Rng& rng) {
  double u1;
  do {
    u1 = rand_unit(rng);
  } while (u1 <= 0.0);
  const double u2 = rand_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

inline double rand_lognormal(Rng& rng, double log_mean, double log_std) {
  return std::exp(log_mean + log_std * rand_normal(rng));
}

}  // namespace bbea
