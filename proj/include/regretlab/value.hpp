#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "regretlab/policy.hpp"

namespace regretlab {

struct StepRecord {
  EnvState state;  // state the action was taken in
  Action action;
  EnvState next;
  double true_reward = 0.0;
  double proxy_reward = 0.0;
};

/// One episode: at most max_steps transitions, ending either on termination
/// or on the step cap.
struct Trajectory {
  Level level;
  std::vector<StepRecord> steps;
  bool terminated = false;  // true when the episode ended before the cap for a
                            // goal reason (the cap itself also sets done)

  double discounted_return(RewardSelector sel, double gamma) const;
};

/// Sample one episode of `policy` on `level`.
Trajectory rollout(const Level& level, const Policy& policy, const DiscountSpec& discount,
                   Rng& rng);
Trajectory rollout(const Level& level, const Policy& policy, const DiscountSpec& discount,
                   uint64_t seed);

/// Exact expected discounted return of `policy` on `level`, by backward
/// induction over the reachable augmented state space (position, flags,
/// remaining objects) and the finite horizon. Throws CapacityError when the
/// reachable space exceeds `state_cap`.
double exact_return(const Level& level, const Policy& policy, RewardSelector sel,
                    const DiscountSpec& discount, size_t state_cap = 2'000'000);

/// max over policies of the true-goal return, given as a callable so regret
/// helpers can take either the closed-form solver oracles or a test stand-in.
using MaxReturnFn = std::function<double(const Level&, const DiscountSpec&)>;

/// Eq-style per-level regret: best achievable true return minus the policy's
/// exact true return.
double expected_regret(const Level& level, const Policy& policy, const DiscountSpec& discount,
                       const MaxReturnFn& max_return);

/// Finitely supported level distribution. Weights must sum to 1 (1e-12).
struct LevelDistribution {
  std::vector<std::pair<Level, double>> support;

  void validate() const;
};

/// Exact expectation of the per-level exact return under `dist`.
double distribution_return(const LevelDistribution& dist, const Policy& policy,
                           RewardSelector sel, const DiscountSpec& discount);

/// Monte-Carlo estimate over `samples` episodes, levels drawn from `dist`.
/// Returns (mean, standard error).
std::pair<double, double> distribution_return_estimate(const LevelDistribution& dist,
                                                       const Policy& policy, RewardSelector sel,
                                                       const DiscountSpec& discount, int samples,
                                                       uint64_t seed);

/// Exact expectation of per-level regret under `dist`. By linearity this
/// equals max over policies of distribution_return minus the policy's
/// distribution_return (the composite per-level optimum attains the max).
double distribution_regret(const LevelDistribution& dist, const Policy& policy,
                           const DiscountSpec& discount, const MaxReturnFn& max_return);

}  // namespace regretlab
