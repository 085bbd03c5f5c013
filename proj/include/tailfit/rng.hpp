#pragma once

#include <cstdint>

namespace tailfit {

// SplitMix64 (Steele, Lea & Flood 2014). Small, fast, and its output
// sequence is fully determined by the 64-bit state, which makes it suitable
// for cheap per-(run, node) substreams. Satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// Seed for the substream identified by (a, b) under a base seed.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                    std::uint64_t b = 0) noexcept {
  std::uint64_t h = SplitMix64::mix(base + 0x9E3779B97F4A7C15ULL);
  h = SplitMix64::mix(h ^ (a + 0xD1B54A32D192ED03ULL));
  h = SplitMix64::mix(h ^ (b + 0x8CB92BA72F3D8DD7ULL));
  return h;
}

// Maps 64 random bits to a double strictly inside (0, 1), using the top 53
// bits plus a half-ulp offset.
constexpr double open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace tailfit
