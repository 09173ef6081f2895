#pragma once

#include <cstdint>

namespace regretlab {

/// Deterministic 64-bit PRNG (SplitMix64) with substream splitting.
///
/// Everything stochastic in the library draws from one of these, seeded
/// explicitly, so runs replay bit-identically across platforms.  We avoid
/// <random> distributions because their outputs are implementation-defined.
///
/// split(stream) derives an independent generator from the current state and
/// a stream label without advancing this generator; the same (state, stream)
/// pair always yields the same substream.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). Unbiased (Lemire multiply-shift with rejection).
  uint32_t below(uint32_t n);

  bool bernoulli(double p) { return uniform01() < p; }

  /// Independent substream for the given label. Pure: does not advance *this.
  Rng split(uint64_t stream) const;

  uint64_t state() const { return state_; }

 private:
  uint64_t state_;
};

/// Stateless mix of two 64-bit words (used for hashing and stream derivation).
uint64_t mix64(uint64_t a, uint64_t b);

}  // namespace regretlab
