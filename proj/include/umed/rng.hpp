#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "umed/errors.hpp"

namespace umed {

// Deterministic randomness with named, fixed algorithms:
//   - stream derivation: splitmix64 finalizer over a golden-ratio combine,
//   - per-stream generator: std::mt19937_64 (output pinned by the standard),
//   - integer draws: unbiased modulo rejection,
//   - unit draws: 53-bit mantissa mapping.
// Identical seeds therefore reproduce identical instances and trials on any
// conforming platform.

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

// Child stream id from a parent seed and an integer tag (trial index,
// instance index, point count, ...). Chain calls to mix in several tags.
constexpr std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64_mix(seed + kGoldenGamma * (tag + 1));
}

// FNV-1a, for folding names (generator family) into stream ids.
constexpr std::uint64_t hash_str(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

class RngStream {
public:
  explicit RngStream(std::uint64_t stream_id) : gen_(stream_id) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1).
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1].
  double next_unit_positive() { return 1.0 - next_unit(); }

  // Uniform integer in [0, n). Modulo rejection keeps the draw unbiased.
  std::uint64_t next_index(std::uint64_t n) {
    if (n == 0) throw DomainError("next_index: n must be positive");
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

private:
  std::mt19937_64 gen_;
};

}  // namespace umed
