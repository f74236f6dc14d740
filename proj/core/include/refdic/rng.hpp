// Copyright the refdic authors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#pragma once

#include <cstdint>
#include <random>

namespace refdic {

// Deterministic uniform generator with a pinned bit-level mapping:
// mt19937_64 output x becomes the double (x >> 11) * 2^-53 in [0, 1).
// Everything seeded (fixtures, parameter init, sampling) draws from this
// so outputs are reproducible across standard library implementations.
class UniformBits {
 public:
  explicit UniformBits(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  double next_unit() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Uniform in [-limit, limit).
  double next_symmetric(double limit) {
    return (2.0 * next_unit() - 1.0) * limit;
  }

  // Uniform integer in [0, bound) by rejection, bound >= 1.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % bound;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace refdic
