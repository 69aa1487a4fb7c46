#pragma once

#include <cstdint>

namespace mekit {

// SplitMix64 stream. The exact update rule is part of the reproducibility
// contract: synthetic fixtures regenerate bit-identically from a seed in any
// implementation of this generator, independent of platform or language.
//
//   state += 0x9E3779B97F4A7C15
//   z = state
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   output: z ^ (z >> 31)
//
// Derived draws are equally pinned down:
//   next_unit  = (next_u64 >> 11) * 2^-53            (uniform in [0,1))
//   next_below = next_u64 % n                        (modulo reduction)
//   next_int   = lo + next_below(hi - lo + 1)        (inclusive bounds)
//   next_range = lo + (hi - lo) * next_unit
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  std::int64_t next_int(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(next_below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  double next_range(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

 private:
  std::uint64_t state_;
};

// FNV-1a, used to derive per-video RNG streams from a base seed and an id.
inline std::uint64_t fnv1a64(const char* data, std::size_t n) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace mekit
