#include "regretlab/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "regretlab/errors.hpp"

namespace regretlab {

namespace {

constexpr double kStochasticTol = 1e-12;

}  // namespace

void TabularUMDP::validate() const {
  if (n_levels < 1 || n_states < 1 || n_actions < 1 || horizon < 1) {
    throw ValidationError("tabular process needs positive levels, states, actions, and horizon");
  }
  if (!(gamma > 0.0) || gamma > 1.0) {
    throw ValidationError("tabular gamma must lie in (0, 1]");
  }
  size_t n_init = static_cast<size_t>(n_levels) * n_states;
  size_t n_entries = n_init * n_actions * n_states;
  if (initial.size() != n_init) throw ValidationError("initial distribution has the wrong shape");
  if (transition.size() != n_entries || reward_true.size() != n_entries ||
      reward_proxy.size() != n_entries) {
    throw ValidationError("transition or reward table has the wrong shape");
  }
  for (int l = 0; l < n_levels; ++l) {
    double total = 0.0;
    for (int s = 0; s < n_states; ++s) {
      double p = initial[init_index(l, s)];
      if (p < 0.0 || !std::isfinite(p)) throw ValidationError("initial probabilities must be in [0, 1]");
      total += p;
    }
    if (std::abs(total - 1.0) > kStochasticTol) {
      throw ValidationError("initial distribution of level " + std::to_string(l) +
                            " does not sum to 1");
    }
    for (int s = 0; s < n_states; ++s) {
      for (int a = 0; a < n_actions; ++a) {
        double row = 0.0;
        for (int s2 = 0; s2 < n_states; ++s2) {
          double p = transition[index(l, s, a, s2)];
          if (p < 0.0 || !std::isfinite(p)) {
            throw ValidationError("transition probabilities must be in [0, 1]");
          }
          row += p;
          if (!std::isfinite(reward_true[index(l, s, a, s2)]) ||
              !std::isfinite(reward_proxy[index(l, s, a, s2)])) {
            throw ValidationError("rewards must be finite");
          }
        }
        if (std::abs(row - 1.0) > kStochasticTol) {
          throw ValidationError("transition row does not sum to 1");
        }
      }
    }
  }
}

int64_t per_level_policy_count(const TabularUMDP& umdp) {
  int64_t count = 1;
  for (int s = 0; s < umdp.n_states; ++s) {
    if (count > std::numeric_limits<int64_t>::max() / umdp.n_actions) {
      throw CapacityError("per-level policy count overflows");
    }
    count *= umdp.n_actions;
  }
  return count;
}

int policy_action(int64_t policy_index, int state, int n_actions) {
  for (int s = 0; s < state; ++s) policy_index /= n_actions;
  return static_cast<int>(policy_index % n_actions);
}

namespace {

/// Exact forward induction over the horizon for an arbitrary state->action map.
template <typename ActionFor>
double evaluate_on_level(const TabularUMDP& umdp, int level, RewardSelector sel,
                         ActionFor&& action_for) {
  const std::vector<double>& reward =
      sel == RewardSelector::True ? umdp.reward_true : umdp.reward_proxy;
  std::vector<double> dist(umdp.n_states), next(umdp.n_states);
  for (int s = 0; s < umdp.n_states; ++s) dist[s] = umdp.initial[umdp.init_index(level, s)];
  double value = 0.0;
  double weight = 1.0;
  for (int t = 0; t < umdp.horizon; ++t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int s = 0; s < umdp.n_states; ++s) {
      if (dist[s] == 0.0) continue;
      int a = action_for(s);
      for (int s2 = 0; s2 < umdp.n_states; ++s2) {
        double p = umdp.transition[umdp.index(level, s, a, s2)];
        if (p == 0.0) continue;
        value += weight * dist[s] * p * reward[umdp.index(level, s, a, s2)];
        next[s2] += dist[s] * p;
      }
    }
    dist.swap(next);
    weight *= umdp.gamma;
  }
  return value;
}

}  // namespace

double level_policy_value(const TabularUMDP& umdp, int level, int64_t policy_index,
                          RewardSelector sel) {
  return evaluate_on_level(umdp, level, sel, [&](int s) {
    return policy_action(policy_index, s, umdp.n_actions);
  });
}

PolicyTables evaluate_all_policies(const TabularUMDP& umdp, int64_t policy_cap) {
  int64_t per_level = per_level_policy_count(umdp);
  if (per_level > policy_cap) {
    throw CapacityError("per-level policy count " + std::to_string(per_level) +
                        " exceeds cap " + std::to_string(policy_cap));
  }
  PolicyTables tables;
  tables.n_levels = umdp.n_levels;
  tables.per_level = per_level;
  tables.v_true.resize(static_cast<size_t>(umdp.n_levels) * per_level);
  tables.v_proxy.resize(tables.v_true.size());
  tables.max_true.assign(umdp.n_levels, -std::numeric_limits<double>::infinity());
  tables.max_proxy.assign(umdp.n_levels, -std::numeric_limits<double>::infinity());
  for (int l = 0; l < umdp.n_levels; ++l) {
    for (int64_t p = 0; p < per_level; ++p) {
      double vt = level_policy_value(umdp, l, p, RewardSelector::True);
      double vp = level_policy_value(umdp, l, p, RewardSelector::Proxy);
      tables.v_true[static_cast<size_t>(l) * per_level + p] = vt;
      tables.v_proxy[static_cast<size_t>(l) * per_level + p] = vp;
      tables.max_true[l] = std::max(tables.max_true[l], vt);
      tables.max_proxy[l] = std::max(tables.max_proxy[l], vp);
    }
  }
  return tables;
}

int64_t joint_policy_count(const PolicyTables& tables, int64_t joint_cap) {
  int64_t count = 1;
  for (int l = 0; l < tables.n_levels; ++l) {
    if (count > joint_cap / tables.per_level) {
      throw CapacityError("joint policy count exceeds cap " + std::to_string(joint_cap));
    }
    count *= tables.per_level;
  }
  return count;
}

int64_t joint_component(int64_t joint_index, int level, int64_t per_level) {
  for (int l = 0; l < level; ++l) joint_index /= per_level;
  return joint_index % per_level;
}

double joint_value(const PolicyTables& tables, std::span<const double> dist, int64_t joint_index,
                   RewardSelector sel) {
  double value = 0.0;
  for (int l = 0; l < tables.n_levels; ++l) {
    if (dist[l] == 0.0) continue;
    value += dist[l] * tables.value(sel, l, joint_component(joint_index, l, tables.per_level));
  }
  return value;
}

double max_joint_value(const PolicyTables& tables, std::span<const double> dist,
                       RewardSelector sel) {
  double value = 0.0;
  for (int l = 0; l < tables.n_levels; ++l) value += dist[l] * tables.max_value(sel, l);
  return value;
}

double PolicyUniverse::max_regret(int64_t policy) const {
  double worst = -std::numeric_limits<double>::infinity();
  for (int l = 0; l < n_levels; ++l) worst = std::max(worst, regret(policy, l));
  return worst;
}

double PolicyUniverse::min_regret(int64_t policy) const {
  double best = std::numeric_limits<double>::infinity();
  for (int l = 0; l < n_levels; ++l) best = std::min(best, regret(policy, l));
  return best;
}

double PolicyUniverse::distribution_value(int64_t policy, std::span<const double> dist) const {
  double value = 0.0;
  for (int l = 0; l < n_levels; ++l) value += dist[l] * this->value(policy, l);
  return value;
}

double PolicyUniverse::distribution_regret(int64_t policy, std::span<const double> dist) const {
  double total = 0.0;
  for (int l = 0; l < n_levels; ++l) total += dist[l] * regret(policy, l);
  return total;
}

PolicyUniverse full_universe(const PolicyTables& tables, int64_t joint_cap) {
  PolicyUniverse u;
  u.n_levels = tables.n_levels;
  u.n_policies = joint_policy_count(tables, joint_cap);
  u.v_true.resize(static_cast<size_t>(u.n_policies) * u.n_levels);
  u.v_proxy.resize(u.v_true.size());
  for (int64_t pi = 0; pi < u.n_policies; ++pi) {
    for (int l = 0; l < u.n_levels; ++l) {
      int64_t p = joint_component(pi, l, tables.per_level);
      u.v_true[static_cast<size_t>(pi) * u.n_levels + l] = tables.value(RewardSelector::True, l, p);
      u.v_proxy[static_cast<size_t>(pi) * u.n_levels + l] =
          tables.value(RewardSelector::Proxy, l, p);
    }
  }
  u.max_true.assign(u.n_levels, 0.0);
  for (int l = 0; l < u.n_levels; ++l) u.max_true[l] = tables.max_true[l];
  return u;
}

void PolicyRestriction::validate(const TabularUMDP& umdp) const {
  if (n_sets < 1) throw ValidationError("restriction needs at least one information set");
  if (info_set.size() != static_cast<size_t>(umdp.n_levels) * umdp.n_states) {
    throw ValidationError("restriction map has the wrong shape");
  }
  for (int id : info_set) {
    if (id < 0 || id >= n_sets) throw ValidationError("information set id out of range");
  }
}

PolicyRestriction hidden_level_restriction(const TabularUMDP& umdp) {
  PolicyRestriction r;
  r.n_sets = umdp.n_states;
  r.info_set.resize(static_cast<size_t>(umdp.n_levels) * umdp.n_states);
  for (int l = 0; l < umdp.n_levels; ++l) {
    for (int s = 0; s < umdp.n_states; ++s) {
      r.info_set[static_cast<size_t>(l) * umdp.n_states + s] = s;
    }
  }
  return r;
}

PolicyUniverse restricted_universe(const TabularUMDP& umdp, const PolicyRestriction& restriction,
                                   int64_t policy_cap) {
  restriction.validate(umdp);
  int64_t count = 1;
  for (int k = 0; k < restriction.n_sets; ++k) {
    count *= umdp.n_actions;
    if (count > policy_cap) {
      throw CapacityError("restricted policy count exceeds cap " + std::to_string(policy_cap));
    }
  }
  PolicyUniverse u;
  u.n_levels = umdp.n_levels;
  u.n_policies = count;
  u.v_true.resize(static_cast<size_t>(count) * umdp.n_levels);
  u.v_proxy.resize(u.v_true.size());
  for (int64_t q = 0; q < count; ++q) {
    for (int l = 0; l < umdp.n_levels; ++l) {
      auto action_for = [&](int s) {
        int set_id = restriction.info_set[static_cast<size_t>(l) * umdp.n_states + s];
        return policy_action(q, set_id, umdp.n_actions);
      };
      u.v_true[static_cast<size_t>(q) * umdp.n_levels + l] =
          evaluate_on_level(umdp, l, RewardSelector::True, action_for);
      u.v_proxy[static_cast<size_t>(q) * umdp.n_levels + l] =
          evaluate_on_level(umdp, l, RewardSelector::Proxy, action_for);
    }
  }
  u.max_true.assign(u.n_levels, -std::numeric_limits<double>::infinity());
  for (int l = 0; l < u.n_levels; ++l) {
    for (int64_t q = 0; q < count; ++q) {
      u.max_true[l] = std::max(u.max_true[l], u.value(q, l));
    }
  }
  return u;
}

MatrixGame regret_game(const PolicyUniverse& universe) {
  MatrixGame game;
  game.rows = universe.n_policies;
  game.cols = universe.n_levels;
  game.payoff.resize(static_cast<size_t>(game.rows) * game.cols);
  for (int64_t pi = 0; pi < universe.n_policies; ++pi) {
    for (int l = 0; l < universe.n_levels; ++l) {
      game.payoff[static_cast<size_t>(pi) * game.cols + l] = universe.regret(pi, l);
    }
  }
  return game;
}

}  // namespace regretlab
