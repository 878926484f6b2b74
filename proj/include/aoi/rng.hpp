#pragma once

// Portable, seedable random streams.
//
// Generator: xoshiro256** 1.0 (Blackman & Vigna), state initialized from the
// first four outputs of SplitMix64 started at the seed. Both algorithms have
// published reference outputs, and they are pinned in tests/test_rng.cpp.
//
// Stream splitting: stream k of master seed s is seeded with
//   mix64(s ^ mix64(k + 1))
// where mix64 is the SplitMix64 output finalizer. The simulator uses stream 0
// for channel states and stream 1 for policy randomization.

#include <cstdint>
#include <limits>

namespace aoi {

// SplitMix64 output finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

 private:
  std::uint64_t state_;
};

class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed) noexcept : seed_(seed) {
    SplitMix64 init(seed);
    for (auto& word : s_) word = init.next();
  }

  // Raw state constructor, for reference-vector tests.
  static RngStream from_state(std::uint64_t s0, std::uint64_t s1, std::uint64_t s2,
                              std::uint64_t s3) noexcept {
    RngStream r(0);
    r.s_[0] = s0;
    r.s_[1] = s1;
    r.s_[2] = s2;
    r.s_[3] = s3;
    return r;
  }

  static RngStream derive(std::uint64_t master_seed, std::uint64_t stream) noexcept {
    return RngStream(mix64(master_seed ^ mix64(stream + 1)));
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept { return next(); }

  std::uint64_t next() noexcept {
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

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  std::uint64_t seed() const noexcept { return seed_; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t seed_;
  std::uint64_t s_[4]{};
};

}  // namespace aoi
