#pragma once

#include <cstdint>

namespace shapecap {

// 64-bit finalizer from splitmix64. Bijective, so distinct inputs always
// map to distinct outputs.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

// Seed for stream `stream_index` under `master_seed`. Equals the
// (stream_index+1)-th raw output of splitmix64 seeded with master_seed,
// so derive_seed(0, 0) is the published first output 0xE220A8397B1DCDAF.
constexpr std::uint64_t derive_seed(std::uint64_t master_seed,
                                    std::uint64_t stream_index) {
  return mix64(master_seed + (stream_index + 1) * kGoldenGamma);
}

// Small deterministic generator used for all sampling. Distributions are
// hand-rolled on top of the raw stream; std::uniform_* would tie output
// bytes to the standard library implementation.
class Rng {
 public:
  explicit constexpr Rng(std::uint64_t seed) : state_(seed) {}

  constexpr std::uint64_t next_u64() {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

  // Unbiased integer in [0, bound). bound must be > 0.
  constexpr std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t limit = bound * ((~std::uint64_t{0}) / bound);
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % bound;
  }

  // Uniform double in [0, 1) with 53 random bits.
  constexpr double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  constexpr double next_range(double lo, double hi) {
    return lo + next_unit() * (hi - lo);
  }

  constexpr bool next_bool(double p_true) { return next_unit() < p_true; }

 private:
  std::uint64_t state_;
};

}  // namespace shapecap
