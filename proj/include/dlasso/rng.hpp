#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace dlasso {

// Seeded generator used wherever randomness is needed. Gaussian draws go
// through the Marsaglia polar method implemented here instead of
// std::normal_distribution, whose output sequence is implementation-defined;
// generated problems must be bit-reproducible for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform draw in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  // +1 or -1 with equal probability.
  double rademacher() { return uniform() < 0.5 ? -1.0 : 1.0; }

  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    // rejection sampling to avoid modulo bias
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace dlasso
