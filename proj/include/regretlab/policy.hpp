#pragma once

#include <array>

#include "regretlab/env.hpp"
#include "regretlab/level.hpp"
#include "regretlab/rng.hpp"

namespace regretlab {

/// Probability over the four actions; entries sum to 1.
using ActionDist = std::array<double, kNumActions>;

inline ActionDist uniform_action_dist() { return {0.25, 0.25, 0.25, 0.25}; }

/// A policy maps (level, state) to an action distribution. Implementations
/// must be deterministic functions of their inputs so exact evaluation and
/// sampled rollouts agree in expectation.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual ActionDist action_dist(const Level& level, const EnvState& state) const = 0;

  Action sample(const Level& level, const EnvState& state, Rng& rng) const;
};

inline Action Policy::sample(const Level& level, const EnvState& state, Rng& rng) const {
  ActionDist dist = action_dist(level, state);
  double u = rng.uniform01(), acc = 0.0;
  for (int a = 0; a < kNumActions; ++a) {
    acc += dist[a];
    if (u < acc) return static_cast<Action>(a);
  }
  return static_cast<Action>(kNumActions - 1);
}

class UniformPolicy final : public Policy {
 public:
  ActionDist action_dist(const Level&, const EnvState&) const override {
    return uniform_action_dist();
  }
};

class FixedActionPolicy final : public Policy {
 public:
  explicit FixedActionPolicy(Action a) : action_(a) {}
  ActionDist action_dist(const Level&, const EnvState&) const override {
    ActionDist d{0, 0, 0, 0};
    d[static_cast<int>(action_)] = 1.0;
    return d;
  }

 private:
  Action action_;
};

}  // namespace regretlab
