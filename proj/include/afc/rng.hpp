#pragma once

#include <cstdint>

namespace afc {

// Counter-based SplitMix64. Output i of the stream keyed by k is
// mix64(k + i * 0x9E3779B97F4A7C15) for i = 1, 2, ... so any stream can be
// reproduced from (key, index) alone. Derived values use only integer
// arithmetic and correctly rounded IEEE operations.
inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Key for sub-stream `index` of purpose `tag` under `seed`.
constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
  return mix64(mix64(seed ^ mix64(tag + kGoldenGamma)) + (index + 1) * kGoldenGamma);
}

class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t key) : key_(key) {}

  constexpr std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGoldenGamma); }

  // Uniform in [0, 1) with 53 random bits.
  constexpr double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n); n must be positive. Rejection keeps it unbiased.
  constexpr std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = (0 - n) % n;  // 2^64 mod n
    while (true) {
      const std::uint64_t x = next_u64();
      if (x >= limit) return x % n;
    }
  }

  constexpr bool bernoulli(double p) { return uniform() < p; }

  // Approximately standard normal: the Irwin-Hall sum of twelve 32-bit
  // uniforms, computed exactly in integers, minus 6.
  constexpr double normal() {
    std::uint64_t sum = 0;
    for (int i = 0; i < 12; ++i) sum += next_u64() >> 32;
    return static_cast<double>(sum) * 0x1.0p-32 - 6.0;
  }

  constexpr std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace afc
