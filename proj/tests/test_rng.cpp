#include <doctest.h>

#include <cstdint>
#include <vector>

#include "regretlab/rng.hpp"

using namespace regretlab;

TEST_SUITE("rng") {

TEST_CASE("same seed reproduces the same sequence") {
  Rng a(12345), b(12345);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds give different sequences") {
  Rng a(1), b(2);
  int same = 0;
  for (int i = 0; i < 64; ++i) same += a.next_u64() == b.next_u64();
  CHECK(same == 0);
}

TEST_CASE("split is pure and does not advance the parent") {
  Rng parent(99);
  uint64_t before = parent.state();
  Rng c1 = parent.split(7);
  Rng c2 = parent.split(7);
  CHECK(parent.state() == before);
  for (int i = 0; i < 32; ++i) CHECK(c1.next_u64() == c2.next_u64());
}

TEST_CASE("distinct stream labels give distinct substreams") {
  Rng parent(99);
  Rng c1 = parent.split(0);
  Rng c2 = parent.split(1);
  int same = 0;
  for (int i = 0; i < 64; ++i) same += c1.next_u64() == c2.next_u64();
  CHECK(same == 0);
}

TEST_CASE("substream differs from the parent stream") {
  Rng parent(424242);
  Rng child = parent.split(0);
  Rng parent_copy(424242);
  int same = 0;
  for (int i = 0; i < 64; ++i) same += child.next_u64() == parent_copy.next_u64();
  CHECK(same == 0);
}

TEST_CASE("uniform01 stays in the half-open unit interval") {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("below stays in range and covers all residues") {
  Rng rng(3);
  CHECK(rng.below(1) == 0);
  std::vector<int> counts(6, 0);
  for (int i = 0; i < 60000; ++i) {
    uint32_t v = rng.below(6);
    REQUIRE(v < 6);
    counts[v] += 1;
  }
  // Fair die at 60k draws: each bin within 5% of 10000 (many sigmas of slack).
  for (int c : counts) {
    CHECK(c > 9500);
    CHECK(c < 10500);
  }
}

TEST_CASE("bernoulli honors the edge probabilities") {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    CHECK_FALSE(rng.bernoulli(0.0));
    CHECK(rng.bernoulli(1.0));
  }
  int hits = 0;
  for (int i = 0; i < 100000; ++i) hits += rng.bernoulli(0.25);
  CHECK(hits > 24000);
  CHECK(hits < 26000);
}

TEST_CASE("mix64 is deterministic and input-sensitive") {
  CHECK(mix64(1, 2) == mix64(1, 2));
  CHECK(mix64(1, 2) != mix64(2, 1));
  CHECK(mix64(0, 0) != mix64(0, 1));
}

}  // TEST_SUITE
