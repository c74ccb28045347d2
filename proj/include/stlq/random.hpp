#pragma once

#include <cstdint>
#include <limits>

namespace stlq {

// splitmix64 finalizer; also used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Purposes a root seed is split into. Each gets its own stream so that
/// training and evaluation can be re-run independently.
enum class Stream : std::uint64_t {
  TrainAgent = 1,
  TrainEnvironment = 2,
  Evaluation = 3,
};

/// Seed of stream `purpose`, sub-stream `index`, derived from `root` by
/// hashing the counter triple. Stable across platforms.
constexpr std::uint64_t derive_seed(std::uint64_t root, Stream purpose,
                                    std::uint64_t index = 0) noexcept {
  return mix64(mix64(mix64(root) ^ static_cast<std::uint64_t>(purpose)) ^ index);
}

/// xoshiro256** with splitmix64 seeding. Satisfies UniformRandomBitGenerator,
/// but the members below are used instead of <random> distributions so that
/// sequences are identical across standard libraries.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) noexcept {
    std::uint64_t z = seed;
    for (auto& word : s_) {
      word = mix64(z);
      z += 0x9e3779b97f4a7c15ULL;
    }
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept {
    // Rejection on the top of the range removes modulo bias.
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t x;
    do {
      x = (*this)();
    } while (x >= limit);
    return x % bound;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
};

}  // namespace stlq
