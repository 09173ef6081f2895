#include <doctest.h>

#include <cmath>
#include <vector>

#include "regretlab/rng.hpp"
#include "regretlab/tabular.hpp"

using namespace regretlab;

namespace {

TabularUMDP empty_umdp(int levels, int states, int actions, int horizon, double gamma) {
  TabularUMDP u;
  u.n_levels = levels;
  u.n_states = states;
  u.n_actions = actions;
  u.horizon = horizon;
  u.gamma = gamma;
  u.initial.assign(static_cast<size_t>(levels) * states, 0.0);
  size_t n = static_cast<size_t>(levels) * states * actions * states;
  u.transition.assign(n, 0.0);
  u.reward_true.assign(n, 0.0);
  u.reward_proxy.assign(n, 0.0);
  return u;
}

void set_deterministic(TabularUMDP& u, int level, int state, int action, int next,
                       double r_true, double r_proxy = 0.0) {
  u.transition[u.index(level, state, action, next)] = 1.0;
  u.reward_true[u.index(level, state, action, next)] = r_true;
  u.reward_proxy[u.index(level, state, action, next)] = r_proxy;
}

/// Two levels over two states; level 0 starts in state 0 and pays for action
/// 0 there, level 1 starts in state 1 and pays 0.7 for action 1 there.
TabularUMDP two_level_fixture() {
  TabularUMDP u = empty_umdp(2, 2, 2, 1, 1.0);
  u.initial[u.init_index(0, 0)] = 1.0;
  u.initial[u.init_index(1, 1)] = 1.0;
  for (int l = 0; l < 2; ++l)
    for (int s = 0; s < 2; ++s)
      for (int a = 0; a < 2; ++a) set_deterministic(u, l, s, a, s, 0.0);
  u.reward_true[u.index(0, 0, 0, 0)] = 1.0;
  u.reward_proxy[u.index(0, 0, 1, 0)] = 0.5;
  u.reward_true[u.index(1, 1, 1, 1)] = 0.7;
  u.validate();
  return u;
}

/// One level, two states, two steps with discounting: action 0 moves
/// 0 -> 1 (reward 1) and then keeps collecting 0.25 in state 1.
TabularUMDP discounted_fixture() {
  TabularUMDP u = empty_umdp(1, 2, 2, 2, 0.5);
  u.initial[u.init_index(0, 0)] = 1.0;
  set_deterministic(u, 0, 0, 0, 1, 1.0);
  set_deterministic(u, 0, 0, 1, 0, 0.0);
  set_deterministic(u, 0, 1, 0, 1, 0.25);
  set_deterministic(u, 0, 1, 1, 0, 0.0);
  u.validate();
  return u;
}

/// Two levels sharing the single start state but preferring opposite
/// actions; hiding the level forces a trade-off.
TabularUMDP conflict_fixture() {
  TabularUMDP u = empty_umdp(2, 1, 2, 1, 1.0);
  u.initial[u.init_index(0, 0)] = 1.0;
  u.initial[u.init_index(1, 0)] = 1.0;
  for (int l = 0; l < 2; ++l)
    for (int a = 0; a < 2; ++a) set_deterministic(u, l, 0, a, 0, 0.0);
  u.reward_true[u.index(0, 0, 0, 0)] = 1.0;
  u.reward_true[u.index(1, 0, 1, 0)] = 0.6;
  u.validate();
  return u;
}

}  // namespace

TEST_SUITE("tabular") {

TEST_CASE("policy indexing works digit by digit") {
  CHECK(policy_action(0, 0, 2) == 0);
  CHECK(policy_action(1, 0, 2) == 1);
  CHECK(policy_action(2, 1, 2) == 1);
  CHECK(policy_action(6, 1, 3) == 2);  // 6 = 0*1 + 2*3 in base 3
  CHECK(policy_action(6, 0, 3) == 0);
  TabularUMDP u = two_level_fixture();
  CHECK(per_level_policy_count(u) == 4);
}

TEST_CASE("per-level policy values match hand arithmetic") {
  TabularUMDP u = two_level_fixture();
  // Level 0: action-at-state-0 decides everything.
  CHECK(level_policy_value(u, 0, 0, RewardSelector::True) == 1.0);
  CHECK(level_policy_value(u, 0, 1, RewardSelector::True) == 0.0);
  CHECK(level_policy_value(u, 0, 2, RewardSelector::True) == 1.0);
  CHECK(level_policy_value(u, 0, 3, RewardSelector::True) == 0.0);
  CHECK(level_policy_value(u, 0, 1, RewardSelector::Proxy) == 0.5);
  CHECK(level_policy_value(u, 0, 0, RewardSelector::Proxy) == 0.0);
  // Level 1: action-at-state-1 decides.
  CHECK(level_policy_value(u, 1, 0, RewardSelector::True) == 0.0);
  CHECK(level_policy_value(u, 1, 2, RewardSelector::True) == 0.7);
  CHECK(level_policy_value(u, 1, 3, RewardSelector::True) == 0.7);
}

TEST_CASE("discounting and multi-step rollouts are exact") {
  TabularUMDP u = discounted_fixture();
  CHECK(level_policy_value(u, 0, 0, RewardSelector::True) ==
        doctest::Approx(1.0 + 0.5 * 0.25).epsilon(1e-15));
  CHECK(level_policy_value(u, 0, 2, RewardSelector::True) == doctest::Approx(1.0));
  CHECK(level_policy_value(u, 0, 1, RewardSelector::True) == 0.0);
  PolicyTables tables = evaluate_all_policies(u);
  CHECK(tables.max_true[0] == doctest::Approx(1.125));
}

TEST_CASE("stochastic transitions average over next states") {
  TabularUMDP u = empty_umdp(1, 2, 1, 1, 1.0);
  u.initial[u.init_index(0, 0)] = 1.0;
  u.transition[u.index(0, 0, 0, 0)] = 0.5;
  u.transition[u.index(0, 0, 0, 1)] = 0.5;
  u.reward_true[u.index(0, 0, 0, 1)] = 1.0;
  u.transition[u.index(0, 1, 0, 1)] = 1.0;
  u.validate();
  CHECK(level_policy_value(u, 0, 0, RewardSelector::True) == doctest::Approx(0.5));
}

TEST_CASE("exhaustive tables cover every policy and level") {
  TabularUMDP u = two_level_fixture();
  PolicyTables tables = evaluate_all_policies(u);
  CHECK(tables.n_levels == 2);
  CHECK(tables.per_level == 4);
  for (int l = 0; l < 2; ++l)
    for (int64_t p = 0; p < 4; ++p)
      CHECK(tables.value(RewardSelector::True, l, p) ==
            level_policy_value(u, l, p, RewardSelector::True));
  CHECK(tables.max_true[0] == 1.0);
  CHECK(tables.max_true[1] == 0.7);
  CHECK(tables.max_proxy[0] == 0.5);
}

TEST_CASE("joint policies recombine per-level components freely") {
  TabularUMDP u = two_level_fixture();
  PolicyTables tables = evaluate_all_policies(u);
  CHECK(joint_policy_count(tables, 1 << 20) == 16);
  for (int64_t j = 0; j < 16; ++j) {
    CHECK(joint_component(j, 0, 4) == j % 4);
    CHECK(joint_component(j, 1, 4) == (j / 4) % 4);
  }
  std::vector<double> dist{0.25, 0.75};
  // Joint 0 plays policy 0 on both levels.
  CHECK(joint_value(tables, dist, 0, RewardSelector::True) ==
        doctest::Approx(0.25 * 1.0 + 0.75 * 0.0));
  // Joint 8 = component 0 on level 0 and component 2 on level 1: both optimal.
  CHECK(joint_value(tables, dist, 8, RewardSelector::True) ==
        doctest::Approx(0.25 * 1.0 + 0.75 * 0.7));

  // The distribution optimum equals the expectation of per-level maxima, and
  // brute force over all joints agrees.
  double best_brute = -1.0;
  for (int64_t j = 0; j < 16; ++j)
    best_brute = std::max(best_brute, joint_value(tables, dist, j, RewardSelector::True));
  CHECK(max_joint_value(tables, dist, RewardSelector::True) == doctest::Approx(best_brute));
  CHECK(max_joint_value(tables, dist, RewardSelector::True) ==
        doctest::Approx(0.25 * tables.max_true[0] + 0.75 * tables.max_true[1]));
}

TEST_CASE("the recombination identity holds on a randomized instance") {
  Rng rng(321);
  TabularUMDP u = empty_umdp(3, 3, 2, 3, 0.9);
  for (int l = 0; l < 3; ++l) {
    u.initial[u.init_index(l, static_cast<int>(rng.below(3)))] = 1.0;
    for (int s = 0; s < 3; ++s)
      for (int a = 0; a < 2; ++a)
        set_deterministic(u, l, s, a, static_cast<int>(rng.below(3)), rng.uniform01());
  }
  u.validate();
  PolicyTables tables = evaluate_all_policies(u);
  std::vector<double> dist{0.2, 0.5, 0.3};
  double expectation_of_max = 0.0;
  for (int l = 0; l < 3; ++l) expectation_of_max += dist[l] * tables.max_true[l];
  CHECK(max_joint_value(tables, dist, RewardSelector::True) ==
        doctest::Approx(expectation_of_max).epsilon(1e-12));

  PolicyUniverse universe = full_universe(tables);
  for (int64_t p = 0; p < universe.n_policies; p += 37) {
    CHECK(universe.distribution_regret(p, dist) ==
          doctest::Approx(max_joint_value(tables, dist, RewardSelector::True) -
                          universe.distribution_value(p, dist))
              .epsilon(1e-12));
  }
}

TEST_CASE("the full universe mirrors the joint tables") {
  TabularUMDP u = two_level_fixture();
  PolicyTables tables = evaluate_all_policies(u);
  PolicyUniverse universe = full_universe(tables);
  CHECK(universe.n_levels == 2);
  CHECK(universe.n_policies == 16);
  std::vector<double> dist{0.5, 0.5};
  for (int64_t j = 0; j < 16; ++j) {
    CHECK(universe.value(j, 0) == tables.value(RewardSelector::True, 0, j % 4));
    CHECK(universe.value(j, 1) == tables.value(RewardSelector::True, 1, (j / 4) % 4));
    CHECK(universe.distribution_value(j, dist) ==
          doctest::Approx(joint_value(tables, dist, j, RewardSelector::True)));
  }
  // Joint 8 is optimal on both levels, so its regrets vanish.
  CHECK(universe.max_regret(8) == 0.0);
  CHECK(universe.min_regret(8) == 0.0);
  // Joint 0 loses 0.7 on level 1 and nothing on level 0.
  CHECK(universe.max_regret(0) == doctest::Approx(0.7));
  CHECK(universe.min_regret(0) == 0.0);
}

TEST_CASE("hiding the level merges decision points") {
  TabularUMDP u = conflict_fixture();
  PolicyRestriction restriction = hidden_level_restriction(u);
  restriction.validate(u);
  CHECK(restriction.n_sets == 1);

  PolicyUniverse restricted = restricted_universe(u, restriction);
  CHECK(restricted.n_policies == 2);  // one action choice at the single set
  CHECK(restricted.value(0, 0) == 1.0);
  CHECK(restricted.value(0, 1) == 0.0);
  CHECK(restricted.value(1, 0) == 0.0);
  CHECK(restricted.value(1, 1) == doctest::Approx(0.6));

  // Regrets inside the universe still measure against the per-level best.
  CHECK(restricted.max_true[0] == 1.0);
  CHECK(restricted.max_true[1] == doctest::Approx(0.6));
  CHECK(restricted.regret(0, 1) == doctest::Approx(0.6));
  CHECK(restricted.regret(1, 0) == doctest::Approx(1.0));

  MatrixGame game = regret_game(restricted);
  CHECK(game.rows == 2);
  CHECK(game.cols == 2);
  CHECK(game.at(0, 0) == 0.0);
  CHECK(game.at(0, 1) == doctest::Approx(0.6));
  CHECK(game.at(1, 0) == doctest::Approx(1.0));
  CHECK(game.at(1, 1) == 0.0);

  // By hand: mixing x on action 0 equalizes 0.6(1-x)... the LP value is
  // 0.6/1.6 = 0.375, strictly better than the best pure row's 0.6.
  GameSolution sol = solve_matrix_game(game);
  CHECK(sol.value == doctest::Approx(0.375).epsilon(1e-9));
  CHECK(sol.row_strategy[0] == doctest::Approx(0.625).epsilon(1e-9));

  // The unrestricted universe recombines freely and zeroes the game out.
  PolicyTables tables = evaluate_all_policies(u);
  GameSolution full = solve_matrix_game(regret_game(full_universe(tables)));
  CHECK(full.value == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("restricted policies equal per-level policies when sets match states") {
  TabularUMDP u = two_level_fixture();
  PolicyRestriction restriction = hidden_level_restriction(u);
  PolicyUniverse restricted = restricted_universe(u, restriction);
  PolicyTables tables = evaluate_all_policies(u);
  CHECK(restricted.n_policies == 4);
  for (int64_t p = 0; p < 4; ++p)
    for (int l = 0; l < 2; ++l)
      CHECK(restricted.value(p, l) == tables.value(RewardSelector::True, l, p));
}

TEST_CASE("validation rejects malformed processes") {
  TabularUMDP u = two_level_fixture();
  u.initial[u.init_index(0, 0)] = 0.9;  // no longer sums to 1
  CHECK_THROWS_AS(u.validate(), ValidationError);

  u = two_level_fixture();
  u.transition[u.index(0, 0, 0, 0)] = 0.5;  // row sums to 0.5
  CHECK_THROWS_AS(u.validate(), ValidationError);

  u = two_level_fixture();
  u.reward_true[u.index(0, 0, 0, 0)] = std::nan("");
  CHECK_THROWS_AS(u.validate(), ValidationError);

  u = two_level_fixture();
  u.gamma = 1.5;
  CHECK_THROWS_AS(u.validate(), ValidationError);

  u = two_level_fixture();
  u.horizon = 0;
  CHECK_THROWS_AS(u.validate(), ValidationError);

  u = two_level_fixture();
  u.initial.pop_back();
  CHECK_THROWS_AS(u.validate(), ValidationError);

  PolicyRestriction bad;
  bad.n_sets = 1;
  bad.info_set = {0, 0, 0, 1};  // id 1 out of range for n_sets = 1
  CHECK_THROWS_AS(bad.validate(two_level_fixture()), ValidationError);
}

TEST_CASE("capacity limits are enforced") {
  TabularUMDP wide = empty_umdp(1, 6, 4, 1, 1.0);
  wide.initial[wide.init_index(0, 0)] = 1.0;
  for (int s = 0; s < 6; ++s)
    for (int a = 0; a < 4; ++a) set_deterministic(wide, 0, s, a, s, 0.0);
  wide.validate();
  // 4^6 = 4096 per-level policies exceed a cap of 1000.
  CHECK_THROWS_AS(evaluate_all_policies(wide, 1000), CapacityError);

  TabularUMDP u = two_level_fixture();
  PolicyTables tables = evaluate_all_policies(u);
  CHECK_THROWS_AS(joint_policy_count(tables, 10), CapacityError);
  CHECK_THROWS_AS(full_universe(tables, 10), CapacityError);
}

}  // TEST_SUITE
