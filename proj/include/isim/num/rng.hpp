#pragma once

#include <cstdint>

namespace isim::num {

// xoshiro256++ 1.0 (Blackman & Vigna, public domain reference constants)
// seeded through SplitMix64. A (seed, stream) pair fully determines the
// sample sequence, so independent components draw from disjoint streams
// of one run seed and stay reproducible across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    reseed(seed, stream);
  }

  void reseed(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();

  // Uniform double in [0, 1), 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi);

  // Unbiased integer in [0, n). n must be > 0.
  std::uint64_t uniform_int(std::uint64_t n);

  // Standard normal via Box-Muller; the paired draw is cached.
  double normal();
  double normal(double mu, double sigma);

  std::uint64_t seed() const { return seed0_; }
  std::uint64_t stream() const { return stream0_; }

 private:
  std::uint64_t state_[4];
  std::uint64_t seed0_ = 0;
  std::uint64_t stream0_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace isim::num
