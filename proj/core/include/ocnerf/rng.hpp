// Copyright 2026 The ocnerf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>

namespace ocnerf {

/// SplitMix64. Small state, so a fresh stream per (seed, iteration, ray)
/// costs nothing and parallel schedules stay reproducible.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : state_(seed) {}
  CounterRng(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0)
      : state_(mix(mix(seed ^ 0x6a09e667f3bcc909ULL) ^ mix(a + 0x3c6ef372fe94f82bULL) ^
                   mix(b + 0xa54ff53a5f1d36f1ULL))) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }
  /// Standard normal via Box-Muller.
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

}  // namespace ocnerf
