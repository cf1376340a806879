// Copyright 2026 The fitq Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>

namespace fitq {

/// SplitMix64 finalizer; a bijective 64-bit mix.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for replication `rep_index`, sub-stream `stream` of a study.
/// Depends only on its arguments, so replications may run in any order.
constexpr std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t rep_index,
                                    std::uint64_t stream) {
  std::uint64_t h = splitmix64_mix(master_seed + 0x9e3779b97f4a7c15ULL);
  h = splitmix64_mix(h ^ (rep_index * 0xd1342543de82ef95ULL + 0x632be59bd9b4e019ULL));
  return splitmix64_mix(h ^ (stream * 0xa0761d6478bd642fULL + 0xe7037ed1a0b428dbULL));
}

/// xoshiro256** 1.0 (Blackman and Vigna), state seeded from SplitMix64.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Xoshiro256(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& s : s_) {
      x += 0x9e3779b97f4a7c15ULL;
      s = splitmix64_mix(x);
    }
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  constexpr result_type operator()() {
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

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// 1 with probability p.
  constexpr int bernoulli(double p) { return uniform01() < p ? 1 : 0; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> s_{};
};

}  // namespace fitq
