#include "regretlab/rng.hpp"

#include "regretlab/errors.hpp"

namespace regretlab {

uint32_t Rng::below(uint32_t n) {
  if (n == 0) throw ContractError("Rng::below: n must be positive");
  uint64_t x = next_u64();
  __uint128_t m = static_cast<__uint128_t>(x) * n;
  auto lo = static_cast<uint64_t>(m);
  if (lo < n) {
    uint64_t threshold = (0 - static_cast<uint64_t>(n)) % n;
    while (lo < threshold) {
      x = next_u64();
      m = static_cast<__uint128_t>(x) * n;
      lo = static_cast<uint64_t>(m);
    }
  }
  return static_cast<uint32_t>(m >> 64);
}

uint64_t mix64(uint64_t a, uint64_t b) {
  uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng Rng::split(uint64_t stream) const { return Rng(mix64(state_, stream)); }

}  // namespace regretlab
