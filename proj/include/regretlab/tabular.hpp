#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "regretlab/game.hpp"
#include "regretlab/types.hpp"

namespace regretlab {

/// Finite episodic decision process with a level parameter: shared state,
/// action, and horizon structure, with per-level initial distributions,
/// transitions, and two reward channels (the goal being trained for and the
/// proxy it can be confused with). Values are computed exactly by forward
/// induction, so every quantity downstream of this type is machine-checkable.
struct TabularUMDP {
  int n_levels = 0;
  int n_states = 0;
  int n_actions = 0;
  int horizon = 0;
  double gamma = 1.0;  // episodic instances are typically undiscounted

  std::vector<double> initial;       // [level][state]
  std::vector<double> transition;    // [level][state][action][next]
  std::vector<double> reward_true;   // [level][state][action][next]
  std::vector<double> reward_proxy;  // [level][state][action][next]

  size_t init_index(int level, int state) const {
    return static_cast<size_t>(level) * n_states + state;
  }
  size_t index(int level, int state, int action, int next) const {
    return ((static_cast<size_t>(level) * n_states + state) * n_actions + action) * n_states +
           next;
  }

  void validate() const;
};

/// Deterministic per-level policies are indexed in base n_actions with one
/// digit per state: digit s of the index is the action taken in state s.
int64_t per_level_policy_count(const TabularUMDP& umdp);
int policy_action(int64_t policy_index, int state, int n_actions);

double level_policy_value(const TabularUMDP& umdp, int level, int64_t policy_index,
                          RewardSelector sel);

/// Exhaustive per-level value tables for every deterministic per-level policy.
struct PolicyTables {
  int n_levels = 0;
  int64_t per_level = 0;
  std::vector<double> v_true;    // [level * per_level + policy]
  std::vector<double> v_proxy;   // same layout
  std::vector<double> max_true;  // [level]
  std::vector<double> max_proxy;

  double value(RewardSelector sel, int level, int64_t policy) const {
    const std::vector<double>& v = sel == RewardSelector::True ? v_true : v_proxy;
    return v[static_cast<size_t>(level) * per_level + policy];
  }
  double max_value(RewardSelector sel, int level) const {
    return (sel == RewardSelector::True ? max_true : max_proxy)[level];
  }
};

PolicyTables evaluate_all_policies(const TabularUMDP& umdp, int64_t policy_cap = 1 << 20);

/// Level-conditioned joint policies assign one per-level policy per level;
/// the joint index is mixed-radix over levels with per_level as the base
/// (level 0 is the least significant digit).
int64_t joint_policy_count(const PolicyTables& tables, int64_t joint_cap);
int64_t joint_component(int64_t joint_index, int level, int64_t per_level);

double joint_value(const PolicyTables& tables, std::span<const double> dist, int64_t joint_index,
                   RewardSelector sel);
/// max over joint policies of the distribution value; equals the expectation
/// of per-level maxima because joint policies recombine freely across levels.
double max_joint_value(const PolicyTables& tables, std::span<const double> dist,
                       RewardSelector sel);

/// A concrete finite policy class with per-policy per-level values: either
/// every level-conditioned joint policy, or a policy class restricted by an
/// information-set map (policies that cannot read the level see merged
/// state-level pairs). Regret inside a universe is measured against the best
/// policy in that same universe.
struct PolicyUniverse {
  int n_levels = 0;
  int64_t n_policies = 0;
  std::vector<double> v_true;    // [policy * n_levels + level]
  std::vector<double> v_proxy;   // same layout; may be empty when not needed
  std::vector<double> max_true;  // per level, over this universe

  double value(int64_t policy, int level) const {
    return v_true[static_cast<size_t>(policy) * n_levels + level];
  }
  double regret(int64_t policy, int level) const { return max_true[level] - value(policy, level); }
  double max_regret(int64_t policy) const;
  double min_regret(int64_t policy) const;
  double distribution_value(int64_t policy, std::span<const double> dist) const;
  double distribution_regret(int64_t policy, std::span<const double> dist) const;
};

PolicyUniverse full_universe(const PolicyTables& tables, int64_t joint_cap = 1 << 20);

/// Maps (level, state) pairs to information sets. A restricted policy picks
/// one action per information set and so cannot condition on anything the
/// map merges. The identity-on-states map hides the level entirely.
struct PolicyRestriction {
  int n_sets = 0;
  std::vector<int> info_set;  // [level * n_states + state]

  void validate(const TabularUMDP& umdp) const;
};

PolicyRestriction hidden_level_restriction(const TabularUMDP& umdp);

PolicyUniverse restricted_universe(const TabularUMDP& umdp, const PolicyRestriction& restriction,
                                   int64_t policy_cap = 1 << 20);

/// Regret game: rows are the universe's policies, columns are levels, payoffs
/// are regrets inside the universe. Row player (policy) minimizes.
MatrixGame regret_game(const PolicyUniverse& universe);

}  // namespace regretlab
