#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "regretlab/errors.hpp"
#include "regretlab/levelgen.hpp"
#include "regretlab/solvers.hpp"
#include "regretlab/value.hpp"

using namespace regretlab;

namespace {

CornerLevel tiny_corner() {
  CornerLevel level;
  for (int r = 0; r < kGridSize; ++r)
    for (int c = 0; c < kGridSize; ++c) level.walls.set(r, c, r >= 4 || c >= 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) level.walls.set(r, c, false);
  level.walls.set(2, 2, true);
  level.mouse_spawn = {3, 3};
  level.cheese = {0, 1};
  return level;
}

/// Reference expectation for the corner env under an arbitrary policy,
/// written directly against the step() API (no shared code with the
/// library's exact evaluator).
double reference_uniform_value(const CornerLevel& level, double gamma, int max_steps) {
  Level wrapped{level};
  // State: (mouse cell, corner_visited); cheese ends the episode.
  using Key = std::pair<int, int>;
  std::map<Key, double> dist{{{cell_index(level.mouse_spawn),
                               level.mouse_spawn == Cell{0, 0} ? 1 : 0},
                              1.0}};
  double total = 0.0, discount = 1.0;
  for (int t = 0; t < max_steps; ++t) {
    std::map<Key, double> next;
    for (const auto& [key, p] : dist) {
      EnvState s;
      s.mouse = cell_from_index(key.first);
      s.corner_visited = key.second != 0;
      s.step_count = static_cast<int16_t>(t);
      for (int a = 0; a < kNumActions; ++a) {
        StepResult res = step(wrapped, s, static_cast<Action>(a));
        total += 0.25 * p * discount * res.true_reward;
        if (!res.state.done) {
          next[{cell_index(res.state.mouse), res.state.corner_visited ? 1 : 0}] +=
              0.25 * p;
        }
      }
    }
    dist = std::move(next);
    discount *= gamma;
  }
  return total;
}

}  // namespace

TEST_SUITE("value") {

TEST_CASE("discounted return sums rewards with the right powers") {
  Trajectory traj;
  traj.level = Level{tiny_corner()};
  StepRecord a, b, c;
  a.true_reward = 1.0;
  a.proxy_reward = 0.5;
  b.true_reward = 0.0;
  c.true_reward = 2.0;
  traj.steps = {a, b, c};
  CHECK(traj.discounted_return(RewardSelector::True, 0.5) == doctest::Approx(1.0 + 0.25 * 2.0));
  CHECK(traj.discounted_return(RewardSelector::Proxy, 0.5) == doctest::Approx(0.5));
}

TEST_CASE("exact evaluation matches an independent forward induction") {
  CornerLevel level = tiny_corner();
  DiscountSpec discount{0.9, 20};
  UniformPolicy uniform;
  double reference = reference_uniform_value(level, discount.gamma, discount.max_steps);
  double exact = exact_return(Level{level}, uniform, RewardSelector::True, discount);
  CHECK(exact == doctest::Approx(reference).epsilon(1e-12));
  // Pinned reference output so regressions in either path are loud.
  CHECK(reference == doctest::Approx(0.072888506596964192).epsilon(1e-9));
}

TEST_CASE("sampled rollouts agree with exact evaluation in expectation") {
  CornerLevel level = tiny_corner();
  DiscountSpec discount{0.9, 20};
  UniformPolicy uniform;
  double exact = exact_return(Level{level}, uniform, RewardSelector::True, discount);
  Rng rng(2024);
  double sum = 0.0, sum_sq = 0.0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    Trajectory traj = rollout(Level{level}, uniform, discount, rng);
    double g = traj.discounted_return(RewardSelector::True, discount.gamma);
    sum += g;
    sum_sq += g * g;
  }
  double mean = sum / n;
  double se = std::sqrt((sum_sq / n - mean * mean) / n);
  CHECK(std::abs(mean - exact) < 5.0 * se + 1e-9);
}

TEST_CASE("deterministic policies make every rollout identical") {
  GeneratorSpec spec;
  Rng rng(31);
  DiscountSpec discount;
  auto scripted = scripted_policy(RewardSelector::True);
  for (int i = 0; i < 10; ++i) {
    Level level = generate(spec, rng);
    double exact = exact_return(level, *scripted, RewardSelector::True, discount);
    Trajectory t1 = rollout(level, *scripted, discount, uint64_t{1});
    Trajectory t2 = rollout(level, *scripted, discount, uint64_t{999});
    CHECK(t1.discounted_return(RewardSelector::True, discount.gamma) ==
          t2.discounted_return(RewardSelector::True, discount.gamma));
    CHECK(t1.discounted_return(RewardSelector::True, discount.gamma) ==
          doctest::Approx(exact).epsilon(1e-12));
  }
}

TEST_CASE("rollouts respect the step cap") {
  CornerLevel level = tiny_corner();
  level.cheese = {0, 3};
  DiscountSpec discount{0.999, 7};
  UniformPolicy uniform;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    Trajectory traj = rollout(Level{level}, uniform, discount, seed);
    CHECK(traj.steps.size() <= 7);
  }
}

TEST_CASE("distribution return is the weighted per-level expectation") {
  CornerLevel a = tiny_corner();
  CornerLevel b = tiny_corner();
  b.cheese = {3, 0};
  DiscountSpec discount{0.9, 20};
  UniformPolicy uniform;
  LevelDistribution dist;
  dist.support = {{Level{a}, 0.25}, {Level{b}, 0.75}};
  dist.validate();
  double va = exact_return(Level{a}, uniform, RewardSelector::True, discount);
  double vb = exact_return(Level{b}, uniform, RewardSelector::True, discount);
  double combined = distribution_return(dist, uniform, RewardSelector::True, discount);
  CHECK(combined == doctest::Approx(0.25 * va + 0.75 * vb).epsilon(1e-12));
}

TEST_CASE("distribution weights must sum to one") {
  LevelDistribution dist;
  dist.support = {{Level{tiny_corner()}, 0.5}};
  CHECK_THROWS_AS(dist.validate(), ValidationError);
}

TEST_CASE("per-level regret is oracle max minus exact return") {
  CornerLevel level = tiny_corner();
  DiscountSpec discount{0.9, 20};
  UniformPolicy uniform;
  auto oracle = [](const Level& l, const DiscountSpec& d) { return oracle_max_return(l, d); };
  double reg = expected_regret(Level{level}, uniform, discount, oracle);
  double direct = oracle_max_return(Level{level}, discount) -
                  exact_return(Level{level}, uniform, RewardSelector::True, discount);
  CHECK(reg == doctest::Approx(direct).epsilon(1e-12));
  CHECK(reg >= 0.0);

  auto scripted = scripted_policy(RewardSelector::True);
  CHECK(expected_regret(Level{level}, *scripted, discount, oracle) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("distribution regret matches the composite-optimum identity") {
  GeneratorSpec spec;
  Rng rng(77);
  DiscountSpec discount;
  UniformPolicy uniform;
  LevelDistribution dist;
  dist.support = {{generate(spec, rng), 0.5}, {generate(spec, rng), 0.3}, {generate(spec, rng), 0.2}};
  auto oracle = [](const Level& l, const DiscountSpec& d) { return oracle_max_return(l, d); };
  double reg = distribution_regret(dist, uniform, discount, oracle);
  double best = 0.0;
  for (const auto& [level, w] : dist.support) best += w * oracle_max_return(level, discount);
  double mine = distribution_return(dist, uniform, RewardSelector::True, discount);
  CHECK(reg == doctest::Approx(best - mine).epsilon(1e-12));
}

}  // TEST_SUITE
