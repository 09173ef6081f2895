#include "regretlab/value.hpp"

#include <cmath>
#include <unordered_map>

namespace regretlab {

namespace {

// Augmented-state key: everything the dynamics depend on besides time.
uint32_t state_key(const Level& level, const EnvState& s) {
  switch (level_kind(level)) {
    case EnvKind::Corner:
      return static_cast<uint32_t>(cell_index(s.mouse)) << 1 | (s.corner_visited ? 1 : 0);
    case EnvKind::Dish:
      return static_cast<uint32_t>(cell_index(s.mouse));
    case EnvKind::Keys:
      return static_cast<uint32_t>(cell_index(s.mouse)) << 20 |
             static_cast<uint32_t>(s.keys_remaining) << 10 | s.chests_remaining;
  }
  throw ContractError("state_key: bad kind");
}

struct Edge {
  int next = -1;  // -1 when the transition terminates the episode
  float true_reward = 0.0f;
  float proxy_reward = 0.0f;
};

/// Reachable augmented states plus their deterministic transition edges.
struct StateGraph {
  std::vector<EnvState> states;
  std::vector<std::array<Edge, kNumActions>> edges;
};

StateGraph enumerate_states(const Level& level, size_t state_cap) {
  StateGraph g;
  std::unordered_map<uint32_t, int> index;
  EnvState root = reset(level);
  index.emplace(state_key(level, root), 0);
  g.states.push_back(root);
  for (size_t i = 0; i < g.states.size(); ++i) {
    g.edges.emplace_back();
    for (int a = 0; a < kNumActions; ++a) {
      EnvState from = g.states[i];
      from.step_count = 0;  // keep the env's own cap out of the edge; time is the DP's job
      StepResult sr = step(level, from, static_cast<Action>(a));
      Edge e;
      e.true_reward = static_cast<float>(sr.true_reward);
      e.proxy_reward = static_cast<float>(sr.proxy_reward);
      if (!sr.state.done) {
        uint32_t key = state_key(level, sr.state);
        auto [it, inserted] = index.emplace(key, static_cast<int>(g.states.size()));
        if (inserted) {
          if (g.states.size() >= state_cap)
            throw CapacityError("exact_return: augmented state space exceeds cap");
          g.states.push_back(sr.state);
        }
        e.next = it->second;
      }
      g.edges[i][a] = e;
    }
  }
  return g;
}

}  // namespace

double Trajectory::discounted_return(RewardSelector sel, double gamma) const {
  double g = 0.0, w = 1.0;
  for (const StepRecord& s : steps) {
    g += w * (sel == RewardSelector::True ? s.true_reward : s.proxy_reward);
    w *= gamma;
  }
  return g;
}

Trajectory rollout(const Level& level, const Policy& policy, const DiscountSpec& discount,
                   Rng& rng) {
  discount.validate();
  validate_level(level);
  Trajectory traj;
  traj.level = level;
  EnvState state = reset(level);
  while (!state.done && static_cast<int>(traj.steps.size()) < discount.max_steps) {
    Action a = policy.sample(level, state, rng);
    StepResult sr = step(level, state, a);
    traj.steps.push_back(StepRecord{state, a, sr.state, sr.true_reward, sr.proxy_reward});
    state = sr.state;
  }
  traj.terminated = state.done;
  return traj;
}

Trajectory rollout(const Level& level, const Policy& policy, const DiscountSpec& discount,
                   uint64_t seed) {
  Rng rng(seed);
  return rollout(level, policy, discount, rng);
}

double exact_return(const Level& level, const Policy& policy, RewardSelector sel,
                    const DiscountSpec& discount, size_t state_cap) {
  discount.validate();
  validate_level(level);
  StateGraph g = enumerate_states(level, state_cap);
  const int horizon = discount.max_steps;
  const size_t n = g.states.size();
  std::vector<double> next_v(n, 0.0), cur_v(n, 0.0);
  for (int t = horizon - 1; t >= 0; --t) {
    for (size_t i = 0; i < n; ++i) {
      EnvState query = g.states[i];
      query.step_count = static_cast<int16_t>(t);
      ActionDist dist = policy.action_dist(level, query);
      double v = 0.0;
      for (int a = 0; a < kNumActions; ++a) {
        if (dist[a] == 0.0) continue;
        const Edge& e = g.edges[i][a];
        double r = sel == RewardSelector::True ? e.true_reward : e.proxy_reward;
        double cont = e.next >= 0 ? discount.gamma * next_v[e.next] : 0.0;
        v += dist[a] * (r + cont);
      }
      cur_v[i] = v;
    }
    std::swap(cur_v, next_v);
  }
  return next_v[0];
}

double expected_regret(const Level& level, const Policy& policy, const DiscountSpec& discount,
                       const MaxReturnFn& max_return) {
  return max_return(level, discount) -
         exact_return(level, policy, RewardSelector::True, discount);
}

void LevelDistribution::validate() const {
  if (support.empty()) throw ValidationError("LevelDistribution: empty support");
  double total = 0.0;
  for (const auto& [level, w] : support) {
    if (w < 0.0) throw ValidationError("LevelDistribution: negative weight");
    validate_level(level);
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ValidationError("LevelDistribution: weights must sum to 1");
}

double distribution_return(const LevelDistribution& dist, const Policy& policy,
                           RewardSelector sel, const DiscountSpec& discount) {
  dist.validate();
  double v = 0.0;
  for (const auto& [level, w] : dist.support) v += w * exact_return(level, policy, sel, discount);
  return v;
}

std::pair<double, double> distribution_return_estimate(const LevelDistribution& dist,
                                                       const Policy& policy, RewardSelector sel,
                                                       const DiscountSpec& discount, int samples,
                                                       uint64_t seed) {
  dist.validate();
  if (samples < 1) throw ValidationError("distribution_return_estimate: samples must be >= 1");
  Rng rng(seed);
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < samples; ++i) {
    double u = rng.uniform01(), acc = 0.0;
    const Level* chosen = &dist.support.back().first;
    for (const auto& [level, w] : dist.support) {
      acc += w;
      if (u < acc) {
        chosen = &level;
        break;
      }
    }
    Rng episode_rng = rng.split(i);
    Trajectory traj = rollout(*chosen, policy, discount, episode_rng);
    double g = traj.discounted_return(sel, discount.gamma);
    sum += g;
    sum_sq += g * g;
  }
  double mean = sum / samples;
  double var = std::max(0.0, sum_sq / samples - mean * mean);
  double se = samples > 1 ? std::sqrt(var / (samples - 1)) : 0.0;
  return {mean, se};
}

double distribution_regret(const LevelDistribution& dist, const Policy& policy,
                           const DiscountSpec& discount, const MaxReturnFn& max_return) {
  dist.validate();
  double v = 0.0;
  for (const auto& [level, w] : dist.support)
    v += w * expected_regret(level, policy, discount, max_return);
  return v;
}

}  // namespace regretlab
