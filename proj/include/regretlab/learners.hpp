#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "regretlab/policy.hpp"
#include "regretlab/value.hpp"

namespace regretlab {

enum class LearnerKind : uint8_t {
  TabularQ,
  LinearPG,
  ScriptedTrue,   // frozen oracle-following policy, updates are counted no-ops
  ScriptedProxy,  // frozen proxy-following policy, updates are counted no-ops
  Uniform,        // frozen uniform-random policy
};

std::string learner_kind_name(LearnerKind kind);
LearnerKind learner_kind_from_name(const std::string& name);

struct LearnerConfig {
  LearnerKind kind = LearnerKind::TabularQ;
  double learning_rate = 0.1;
  double epsilon = 0.1;        // TabularQ exploration rate
  double entropy_bonus = 0.01; // LinearPG entropy regularizer weight
  RewardSelector train_reward = RewardSelector::True;

  void validate() const;
};

struct UpdateStats {
  double mean_return = 0.0;  // batch mean of discounted training-reward returns
  double grad_norm = 0.0;    // L2 norm of the applied parameter change
};

/// A trainable policy. `policy()` is the behavior policy used to gather data;
/// `eval_policy()` strips exploration noise where that makes sense (greedy for
/// TabularQ, identical to `policy()` otherwise).
class Learner {
 public:
  virtual ~Learner() = default;

  virtual const Policy& policy() const = 0;
  virtual const Policy& eval_policy() const { return policy(); }

  /// Consumes a batch of complete episodes and adjusts parameters once.
  virtual UpdateStats update(std::span<const Trajectory> batch, const DiscountSpec& discount) = 0;

  /// Number of times update() has been called (including no-op updates on
  /// frozen learners); lets training code assert when parameters may change.
  uint64_t update_count() const { return update_count_; }

  virtual LearnerKind kind() const = 0;
  virtual void save(std::ostream& out) const = 0;

 protected:
  uint64_t update_count_ = 0;
};

class TabularQLearner final : public Learner {
 public:
  TabularQLearner(double learning_rate, double epsilon, RewardSelector train_reward,
                  uint64_t seed);

  const Policy& policy() const override;
  const Policy& eval_policy() const override;
  UpdateStats update(std::span<const Trajectory> batch, const DiscountSpec& discount) override;
  LearnerKind kind() const override { return LearnerKind::TabularQ; }
  void save(std::ostream& out) const override;

  size_t table_size() const;

  struct Impl;

 private:
  friend std::unique_ptr<Learner> load_learner(std::istream& in);

  std::shared_ptr<Impl> impl_;
  std::unique_ptr<Policy> behavior_;
  std::unique_ptr<Policy> greedy_;
};

class LinearPGLearner final : public Learner {
 public:
  LinearPGLearner(double learning_rate, double entropy_bonus, RewardSelector train_reward);

  const Policy& policy() const override;
  UpdateStats update(std::span<const Trajectory> batch, const DiscountSpec& discount) override;
  LearnerKind kind() const override { return LearnerKind::LinearPG; }
  void save(std::ostream& out) const override;

  /// Mean over episodes of (advantage-weighted log-likelihood + entropy bonus),
  /// the scalar whose gradient update() ascends. Advantages use a per-level
  /// mean-return baseline computed from the batch and are treated as constants.
  double surrogate_objective(std::span<const Trajectory> batch, const DiscountSpec& discount) const;

  /// Analytic gradient of surrogate_objective with respect to the flattened
  /// weight matrix (action-major). Sized n_actions * feature_count().
  std::vector<double> surrogate_gradient(std::span<const Trajectory> batch,
                                         const DiscountSpec& discount) const;

  size_t feature_count() const;
  std::vector<double>& weights();  // flattened, action-major; exposed for tests

  struct Impl;

 private:
  friend std::unique_ptr<Learner> load_learner(std::istream& in);

  std::shared_ptr<Impl> impl_;
  std::unique_ptr<Policy> softmax_;
};

std::unique_ptr<Learner> make_learner(const LearnerConfig& config, uint64_t seed);

/// Reads a learner snapshot previously written by Learner::save.
std::unique_ptr<Learner> load_learner(std::istream& in);
std::unique_ptr<Learner> load_learner_file(const std::string& path);
void save_learner_file(const Learner& learner, const std::string& path);

// --- evaluation ---------------------------------------------------------------

struct EvalProtocol {
  int env_step_budget = 512;  // per level; episodes run back to back until spent
  RewardSelector reward = RewardSelector::True;

  void validate() const;
};

struct EvalResult {
  double mean = 0.0;       // mean over levels of per-level mean episode return
  double std_error = 0.0;  // standard error across levels
  int64_t episodes = 0;
  int64_t env_steps = 0;
};

/// Runs episodes back to back on each level until the step budget is spent
/// (the episode in flight when the budget crosses zero runs to completion, so
/// every counted episode is complete). Per-level means are averaged across
/// levels with equal weight.
EvalResult evaluate(const Policy& policy, std::span<const Level> levels,
                    const EvalProtocol& protocol, const DiscountSpec& discount, uint64_t seed);

}  // namespace regretlab
