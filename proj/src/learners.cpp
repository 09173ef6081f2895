#include "regretlab/learners.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "regretlab/env.hpp"
#include "regretlab/errors.hpp"
#include "regretlab/solvers.hpp"

namespace regretlab {

std::string learner_kind_name(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::TabularQ: return "tabular_q";
    case LearnerKind::LinearPG: return "linear_pg";
    case LearnerKind::ScriptedTrue: return "scripted_true";
    case LearnerKind::ScriptedProxy: return "scripted_proxy";
    case LearnerKind::Uniform: return "uniform";
  }
  throw ContractError("unknown learner kind");
}

LearnerKind learner_kind_from_name(const std::string& name) {
  if (name == "tabular_q") return LearnerKind::TabularQ;
  if (name == "linear_pg") return LearnerKind::LinearPG;
  if (name == "scripted_true") return LearnerKind::ScriptedTrue;
  if (name == "scripted_proxy") return LearnerKind::ScriptedProxy;
  if (name == "uniform") return LearnerKind::Uniform;
  throw ValidationError("unknown learner kind: " + name);
}

void LearnerConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("learning_rate must be positive and finite");
  }
  if (epsilon < 0.0 || epsilon > 1.0) throw ValidationError("epsilon must lie in [0, 1]");
  if (entropy_bonus < 0.0 || !std::isfinite(entropy_bonus)) {
    throw ValidationError("entropy_bonus must be nonnegative and finite");
  }
}

namespace {

double batch_mean_return(std::span<const Trajectory> batch, RewardSelector sel,
                         const DiscountSpec& discount) {
  if (batch.empty()) return 0.0;
  double total = 0.0;
  for (const Trajectory& t : batch) total += t.discounted_return(sel, discount.gamma);
  return total / static_cast<double>(batch.size());
}

}  // namespace

// --- tabular Q -----------------------------------------------------------------

struct TabularQLearner::Impl {
  std::unordered_map<uint64_t, std::array<double, 4>> q;
  double learning_rate = 0.1;
  double epsilon = 0.1;
  RewardSelector train_reward = RewardSelector::True;
};

namespace {

/// Epsilon-greedy over the learned Q row for the current observation; uniform
/// when the observation has never been updated.
class TabularQPolicy final : public Policy {
 public:
  TabularQPolicy(std::shared_ptr<TabularQLearner::Impl> impl, double epsilon)
      : impl_(std::move(impl)), epsilon_(epsilon) {}

  ActionDist action_dist(const Level& level, const EnvState& state) const override {
    Observation obs = observe(level, state);
    auto it = impl_->q.find(observation_digest(obs));
    if (it == impl_->q.end()) return uniform_action_dist();
    const std::array<double, 4>& row = it->second;
    size_t greedy = 0;
    for (size_t a = 1; a < row.size(); ++a) {
      if (row[a] > row[greedy]) greedy = a;
    }
    ActionDist dist;
    dist.fill(epsilon_ / 4.0);
    dist[greedy] += 1.0 - epsilon_;
    return dist;
  }

 private:
  std::shared_ptr<TabularQLearner::Impl> impl_;
  double epsilon_;
};

}  // namespace

TabularQLearner::TabularQLearner(double learning_rate, double epsilon,
                                 RewardSelector train_reward, uint64_t /*seed*/) {
  impl_ = std::make_shared<Impl>();
  impl_->learning_rate = learning_rate;
  impl_->epsilon = epsilon;
  impl_->train_reward = train_reward;
  behavior_ = std::make_unique<TabularQPolicy>(impl_, epsilon);
  greedy_ = std::make_unique<TabularQPolicy>(impl_, 0.0);
}

const Policy& TabularQLearner::policy() const { return *behavior_; }
const Policy& TabularQLearner::eval_policy() const { return *greedy_; }
size_t TabularQLearner::table_size() const { return impl_->q.size(); }

UpdateStats TabularQLearner::update(std::span<const Trajectory> batch,
                                    const DiscountSpec& discount) {
  ++update_count_;
  UpdateStats stats;
  stats.mean_return = batch_mean_return(batch, impl_->train_reward, discount);
  double sq_change = 0.0;
  for (const Trajectory& traj : batch) {
    for (const StepRecord& step : traj.steps) {
      uint64_t here = observation_digest(observe(traj.level, step.state));
      double target = impl_->train_reward == RewardSelector::True ? step.true_reward
                                                                  : step.proxy_reward;
      if (!step.next.done) {
        auto it = impl_->q.find(observation_digest(observe(traj.level, step.next)));
        if (it != impl_->q.end()) {
          target += discount.gamma * *std::max_element(it->second.begin(), it->second.end());
        }
      }
      std::array<double, 4>& row = impl_->q[here];  // inserts zeros on first visit
      double delta = impl_->learning_rate * (target - row[static_cast<size_t>(step.action)]);
      row[static_cast<size_t>(step.action)] += delta;
      sq_change += delta * delta;
    }
  }
  stats.grad_norm = std::sqrt(sq_change);
  return stats;
}

void TabularQLearner::save(std::ostream& out) const {
  out << "regretlab-snapshot v1\n";
  out << "kind tabular_q\n";
  out << "train_reward " << (impl_->train_reward == RewardSelector::True ? "true" : "proxy")
      << "\n";
  out << std::setprecision(17);
  out << "learning_rate " << impl_->learning_rate << "\n";
  out << "epsilon " << impl_->epsilon << "\n";
  out << "entries " << impl_->q.size() << "\n";
  // Sorted by key so snapshots of equal tables are byte-identical.
  std::vector<uint64_t> keys;
  keys.reserve(impl_->q.size());
  for (const auto& [k, _] : impl_->q) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  for (uint64_t k : keys) {
    const std::array<double, 4>& row = impl_->q.at(k);
    out << std::hex << k << std::dec;
    for (double v : row) out << ' ' << v;
    out << "\n";
  }
}

// --- linear policy gradient ------------------------------------------------------

struct LinearPGLearner::Impl {
  std::vector<double> w;  // action-major [a * features + i]; empty until first update
  size_t features = 0;
  double learning_rate = 0.1;
  double entropy_bonus = 0.01;
  RewardSelector train_reward = RewardSelector::True;
};

namespace {

std::vector<uint16_t> active_features(const Observation& obs) {
  std::vector<uint16_t> idx;
  idx.reserve(64);
  for (size_t i = 0; i < obs.data.size(); ++i) {
    if (obs.data[i] != 0) idx.push_back(static_cast<uint16_t>(i));
  }
  return idx;
}

ActionDist softmax_over_features(const std::vector<double>& w, size_t features,
                                 const std::vector<uint16_t>& idx) {
  std::array<double, 4> score{};
  if (!w.empty()) {
    for (size_t a = 0; a < 4; ++a) {
      const double* row = &w[a * features];
      double s = 0.0;
      for (uint16_t i : idx) s += row[i];
      score[a] = s;
    }
  }
  double peak = *std::max_element(score.begin(), score.end());
  ActionDist dist;
  double total = 0.0;
  for (size_t a = 0; a < 4; ++a) {
    dist[a] = std::exp(score[a] - peak);
    total += dist[a];
  }
  for (double& p : dist) p /= total;
  return dist;
}

class LinearSoftmaxPolicy final : public Policy {
 public:
  explicit LinearSoftmaxPolicy(std::shared_ptr<LinearPGLearner::Impl> impl)
      : impl_(std::move(impl)) {}

  ActionDist action_dist(const Level& level, const EnvState& state) const override {
    Observation obs = observe(level, state);
    if (impl_->w.empty()) return uniform_action_dist();
    if (obs.data.size() != impl_->features) {
      throw ContractError("observation size does not match learner feature count");
    }
    return softmax_over_features(impl_->w, impl_->features, active_features(obs));
  }

 private:
  std::shared_ptr<LinearPGLearner::Impl> impl_;
};

struct EpisodeView {
  double advantage = 0.0;
  std::vector<std::vector<uint16_t>> step_features;
  std::vector<size_t> actions;
};

/// Flattens a batch into per-step feature indices plus baseline-centered
/// advantages (baseline = mean return among episodes sharing a level digest).
std::vector<EpisodeView> build_views(std::span<const Trajectory> batch, RewardSelector sel,
                                     const DiscountSpec& discount, size_t expected_features) {
  std::unordered_map<uint64_t, std::pair<double, int>> level_totals;
  std::vector<double> returns(batch.size());
  std::vector<uint64_t> digests(batch.size());
  for (size_t e = 0; e < batch.size(); ++e) {
    returns[e] = batch[e].discounted_return(sel, discount.gamma);
    digests[e] = level_digest(batch[e].level);
    auto& [sum, count] = level_totals[digests[e]];
    sum += returns[e];
    count += 1;
  }
  std::vector<EpisodeView> views(batch.size());
  for (size_t e = 0; e < batch.size(); ++e) {
    const auto& [sum, count] = level_totals[digests[e]];
    views[e].advantage = returns[e] - sum / count;
    views[e].step_features.reserve(batch[e].steps.size());
    views[e].actions.reserve(batch[e].steps.size());
    for (const StepRecord& step : batch[e].steps) {
      Observation obs = observe(batch[e].level, step.state);
      if (obs.data.size() != expected_features) {
        throw ContractError("mixed observation sizes within one training batch");
      }
      views[e].step_features.push_back(active_features(obs));
      views[e].actions.push_back(static_cast<size_t>(step.action));
    }
  }
  return views;
}

constexpr double kProbFloor = 1e-300;

}  // namespace

LinearPGLearner::LinearPGLearner(double learning_rate, double entropy_bonus,
                                 RewardSelector train_reward) {
  impl_ = std::make_shared<Impl>();
  impl_->learning_rate = learning_rate;
  impl_->entropy_bonus = entropy_bonus;
  impl_->train_reward = train_reward;
  softmax_ = std::make_unique<LinearSoftmaxPolicy>(impl_);
}

const Policy& LinearPGLearner::policy() const { return *softmax_; }
size_t LinearPGLearner::feature_count() const { return impl_->features; }
std::vector<double>& LinearPGLearner::weights() { return impl_->w; }

double LinearPGLearner::surrogate_objective(std::span<const Trajectory> batch,
                                            const DiscountSpec& discount) const {
  if (batch.empty()) return 0.0;
  size_t features = impl_->features;
  if (features == 0) features = observe(batch[0].level, batch[0].steps.at(0).state).data.size();
  std::vector<EpisodeView> views = build_views(batch, impl_->train_reward, discount, features);
  double total = 0.0;
  for (const EpisodeView& ep : views) {
    for (size_t t = 0; t < ep.step_features.size(); ++t) {
      ActionDist dist = softmax_over_features(impl_->w, features, ep.step_features[t]);
      total += ep.advantage * std::log(std::max(dist[ep.actions[t]], kProbFloor));
      double entropy = 0.0;
      for (double p : dist) {
        if (p > kProbFloor) entropy -= p * std::log(p);
      }
      total += impl_->entropy_bonus * entropy;
    }
  }
  return total / static_cast<double>(batch.size());
}

std::vector<double> LinearPGLearner::surrogate_gradient(std::span<const Trajectory> batch,
                                                        const DiscountSpec& discount) const {
  if (batch.empty()) return {};
  size_t features = impl_->features;
  if (features == 0) features = observe(batch[0].level, batch[0].steps.at(0).state).data.size();
  std::vector<EpisodeView> views = build_views(batch, impl_->train_reward, discount, features);
  std::vector<double> grad(4 * features, 0.0);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (const EpisodeView& ep : views) {
    for (size_t t = 0; t < ep.step_features.size(); ++t) {
      const std::vector<uint16_t>& idx = ep.step_features[t];
      ActionDist dist = softmax_over_features(impl_->w, features, idx);
      double entropy = 0.0;
      for (double p : dist) {
        if (p > kProbFloor) entropy -= p * std::log(p);
      }
      for (size_t a = 0; a < 4; ++a) {
        // d/dscore_a of [A log pi(a_t) + kappa H]
        double coeff = ep.advantage * ((a == ep.actions[t] ? 1.0 : 0.0) - dist[a]);
        if (dist[a] > kProbFloor) {
          coeff -= impl_->entropy_bonus * dist[a] * (std::log(dist[a]) + entropy);
        }
        coeff *= inv_n;
        double* row = &grad[a * features];
        for (uint16_t i : idx) row[i] += coeff;
      }
    }
  }
  return grad;
}

UpdateStats LinearPGLearner::update(std::span<const Trajectory> batch,
                                    const DiscountSpec& discount) {
  ++update_count_;
  UpdateStats stats;
  stats.mean_return = batch_mean_return(batch, impl_->train_reward, discount);
  if (batch.empty()) return stats;
  if (impl_->features == 0) {
    impl_->features = observe(batch[0].level, batch[0].steps.at(0).state).data.size();
    impl_->w.assign(4 * impl_->features, 0.0);
  }
  std::vector<double> grad = surrogate_gradient(batch, discount);
  double sq = 0.0;
  for (size_t k = 0; k < grad.size(); ++k) {
    double delta = impl_->learning_rate * grad[k];
    impl_->w[k] += delta;
    sq += delta * delta;
  }
  stats.grad_norm = std::sqrt(sq);
  return stats;
}

void LinearPGLearner::save(std::ostream& out) const {
  out << "regretlab-snapshot v1\n";
  out << "kind linear_pg\n";
  out << "train_reward " << (impl_->train_reward == RewardSelector::True ? "true" : "proxy")
      << "\n";
  out << std::setprecision(17);
  out << "learning_rate " << impl_->learning_rate << "\n";
  out << "entropy_bonus " << impl_->entropy_bonus << "\n";
  out << "features " << impl_->features << "\n";
  if (impl_->features != 0) {
    for (size_t a = 0; a < 4; ++a) {
      out << "weights " << a;
      for (size_t i = 0; i < impl_->features; ++i) out << ' ' << impl_->w[a * impl_->features + i];
      out << "\n";
    }
  }
}

// --- frozen policies --------------------------------------------------------------

namespace {

class FrozenLearner final : public Learner {
 public:
  FrozenLearner(LearnerKind kind, std::unique_ptr<Policy> policy,
                RewardSelector stats_reward)
      : kind_(kind), policy_(std::move(policy)), stats_reward_(stats_reward) {}

  const Policy& policy() const override { return *policy_; }

  UpdateStats update(std::span<const Trajectory> batch, const DiscountSpec& discount) override {
    ++update_count_;  // counted so training loops can assert update cadence
    UpdateStats stats;
    stats.mean_return = batch_mean_return(batch, stats_reward_, discount);
    return stats;
  }

  LearnerKind kind() const override { return kind_; }

  void save(std::ostream& out) const override {
    out << "regretlab-snapshot v1\n";
    out << "kind " << learner_kind_name(kind_) << "\n";
  }

 private:
  LearnerKind kind_;
  std::unique_ptr<Policy> policy_;
  RewardSelector stats_reward_;
};

}  // namespace

std::unique_ptr<Learner> make_learner(const LearnerConfig& config, uint64_t seed) {
  config.validate();
  switch (config.kind) {
    case LearnerKind::TabularQ:
      return std::make_unique<TabularQLearner>(config.learning_rate, config.epsilon,
                                               config.train_reward, seed);
    case LearnerKind::LinearPG:
      return std::make_unique<LinearPGLearner>(config.learning_rate, config.entropy_bonus,
                                               config.train_reward);
    case LearnerKind::ScriptedTrue:
      return std::make_unique<FrozenLearner>(LearnerKind::ScriptedTrue,
                                             scripted_policy(RewardSelector::True),
                                             config.train_reward);
    case LearnerKind::ScriptedProxy:
      return std::make_unique<FrozenLearner>(LearnerKind::ScriptedProxy,
                                             scripted_policy(RewardSelector::Proxy),
                                             config.train_reward);
    case LearnerKind::Uniform:
      return std::make_unique<FrozenLearner>(LearnerKind::Uniform,
                                             std::make_unique<UniformPolicy>(),
                                             config.train_reward);
  }
  throw ContractError("unknown learner kind");
}

// --- snapshot IO -------------------------------------------------------------------

namespace {

RewardSelector reward_from_name(const std::string& name) {
  if (name == "true") return RewardSelector::True;
  if (name == "proxy") return RewardSelector::Proxy;
  throw ValidationError("unknown reward selector in snapshot: " + name);
}

std::string expect_key(std::istream& in, const std::string& key) {
  std::string token, value;
  if (!(in >> token >> value) || token != key) {
    throw ValidationError("malformed snapshot: expected field '" + key + "'");
  }
  return value;
}

}  // namespace

std::unique_ptr<Learner> load_learner(std::istream& in) {
  std::string magic, version;
  if (!(in >> magic >> version) || magic != "regretlab-snapshot") {
    throw ValidationError("not a learner snapshot");
  }
  if (version != "v1") throw ValidationError("unsupported snapshot version: " + version);
  std::string kind_name = expect_key(in, "kind");
  LearnerKind kind = learner_kind_from_name(kind_name);
  if (kind == LearnerKind::ScriptedTrue || kind == LearnerKind::ScriptedProxy ||
      kind == LearnerKind::Uniform) {
    LearnerConfig config;
    config.kind = kind;
    return make_learner(config, 0);
  }
  RewardSelector train_reward = reward_from_name(expect_key(in, "train_reward"));
  double learning_rate = std::stod(expect_key(in, "learning_rate"));
  if (kind == LearnerKind::TabularQ) {
    double epsilon = std::stod(expect_key(in, "epsilon"));
    size_t entries = std::stoull(expect_key(in, "entries"));
    auto learner = std::make_unique<TabularQLearner>(learning_rate, epsilon, train_reward, 0);
    for (size_t n = 0; n < entries; ++n) {
      uint64_t key = 0;
      std::array<double, 4> row{};
      if (!(in >> std::hex >> key >> std::dec >> row[0] >> row[1] >> row[2] >> row[3])) {
        throw ValidationError("truncated tabular snapshot");
      }
      learner->impl_->q[key] = row;
    }
    return learner;
  }
  double entropy_bonus = std::stod(expect_key(in, "entropy_bonus"));
  size_t features = std::stoull(expect_key(in, "features"));
  auto learner = std::make_unique<LinearPGLearner>(learning_rate, entropy_bonus, train_reward);
  learner->impl_->features = features;
  if (features != 0) {
    learner->impl_->w.assign(4 * features, 0.0);
    for (size_t a = 0; a < 4; ++a) {
      std::string token;
      size_t row = 0;
      if (!(in >> token >> row) || token != "weights" || row != a) {
        throw ValidationError("malformed weight row in snapshot");
      }
      for (size_t i = 0; i < features; ++i) {
        if (!(in >> learner->impl_->w[a * features + i])) {
          throw ValidationError("truncated weight row in snapshot");
        }
      }
    }
  }
  return learner;
}

std::unique_ptr<Learner> load_learner_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open snapshot file: " + path);
  return load_learner(in);
}

void save_learner_file(const Learner& learner, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write snapshot file: " + path);
  learner.save(out);
  if (!out) throw ValidationError("failed writing snapshot file: " + path);
}

// --- evaluation ---------------------------------------------------------------------

void EvalProtocol::validate() const {
  if (env_step_budget < 1) throw ValidationError("eval step budget must be at least 1");
}

EvalResult evaluate(const Policy& policy, std::span<const Level> levels,
                    const EvalProtocol& protocol, const DiscountSpec& discount, uint64_t seed) {
  protocol.validate();
  discount.validate();
  if (levels.empty()) throw ValidationError("evaluate() needs at least one level");
  Rng root(seed);
  EvalResult result;
  std::vector<double> level_means;
  level_means.reserve(levels.size());
  for (size_t i = 0; i < levels.size(); ++i) {
    Rng rng = root.split(i);
    int64_t used = 0;
    int64_t episodes = 0;
    double total = 0.0;
    while (used < protocol.env_step_budget) {
      Trajectory traj = rollout(levels[i], policy, discount, rng);
      used += static_cast<int64_t>(traj.steps.size());
      total += traj.discounted_return(protocol.reward, discount.gamma);
      episodes += 1;
    }
    level_means.push_back(total / static_cast<double>(episodes));
    result.episodes += episodes;
    result.env_steps += used;
  }
  double mean = 0.0;
  for (double m : level_means) mean += m;
  mean /= static_cast<double>(level_means.size());
  result.mean = mean;
  if (level_means.size() > 1) {
    double ss = 0.0;
    for (double m : level_means) ss += (m - mean) * (m - mean);
    double variance = ss / static_cast<double>(level_means.size() - 1);
    result.std_error = std::sqrt(variance / static_cast<double>(level_means.size()));
  }
  return result;
}

}  // namespace regretlab
