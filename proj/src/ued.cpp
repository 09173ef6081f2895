#include "regretlab/ued.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "regretlab/errors.hpp"

namespace regretlab {

// --- estimators -----------------------------------------------------------------

std::string estimator_kind_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::MaxLatest: return "max_latest";
    case EstimatorKind::OracleLatest: return "oracle_latest";
    case EstimatorKind::NegValue: return "neg_value";
  }
  throw ContractError("unknown estimator kind");
}

EstimatorKind estimator_kind_from_name(const std::string& name) {
  if (name == "max_latest") return EstimatorKind::MaxLatest;
  if (name == "oracle_latest") return EstimatorKind::OracleLatest;
  if (name == "neg_value") return EstimatorKind::NegValue;
  throw ValidationError("unknown estimator kind: " + name);
}

double mean_of(std::span<const double> values) {
  if (values.empty()) throw ValidationError("mean of empty value list");
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

double estimate_max_latest(double max_seen, std::span<const double> latest_returns) {
  return std::max(0.0, max_seen - mean_of(latest_returns));
}

double estimate_oracle_latest(double oracle_max, std::span<const double> latest_returns) {
  return std::max(0.0, oracle_max - mean_of(latest_returns));
}

double estimate_neg_value(std::span<const double> latest_returns) {
  return -mean_of(latest_returns);
}

// --- buffer ----------------------------------------------------------------------

LevelBuffer::LevelBuffer(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw ValidationError("buffer capacity must be at least 1");
  entries_.reserve(static_cast<size_t>(capacity));
}

bool LevelBuffer::insert(BufferEntry entry) {
  entry.insert_seq = next_seq_++;
  if (entries_.size() < static_cast<size_t>(capacity_)) {
    entries_.push_back(std::move(entry));
    return true;
  }
  size_t victim = 0;
  for (size_t i = 1; i < entries_.size(); ++i) {
    if (entries_[i].score < entries_[victim].score ||
        (entries_[i].score == entries_[victim].score &&
         entries_[i].insert_seq < entries_[victim].insert_seq)) {
      victim = i;
    }
  }
  if (entry.score > entries_[victim].score) {
    entries_[victim] = std::move(entry);
    return true;
  }
  return false;
}

std::vector<double> LevelBuffer::replay_distribution(double temperature, double stale_mix,
                                                     int64_t iteration) const {
  if (entries_.empty()) throw ContractError("replay distribution over an empty buffer");
  const size_t n = entries_.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (entries_[a].score != entries_[b].score) return entries_[a].score > entries_[b].score;
    return entries_[a].insert_seq < entries_[b].insert_seq;
  });
  std::vector<double> rank_weight(n, 0.0);
  double rank_total = 0.0;
  for (size_t pos = 0; pos < n; ++pos) {
    double w = std::pow(static_cast<double>(pos + 1), -1.0 / temperature);
    rank_weight[order[pos]] = w;
    rank_total += w;
  }
  std::vector<double> stale_weight(n, 0.0);
  double stale_total = 0.0;
  for (size_t i = 0; i < n; ++i) {
    stale_weight[i] = static_cast<double>(std::max<int64_t>(0, iteration - entries_[i].last_touched));
    stale_total += stale_weight[i];
  }
  std::vector<double> dist(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    double p_rank = rank_weight[i] / rank_total;
    double p_stale = stale_total > 0.0 ? stale_weight[i] / stale_total
                                       : 1.0 / static_cast<double>(n);
    dist[i] = (1.0 - stale_mix) * p_rank + stale_mix * p_stale;
  }
  return dist;
}

double LevelBuffer::fraction_distinguishing() const {
  if (entries_.empty()) return 0.0;
  size_t count = 0;
  for (const BufferEntry& e : entries_) count += e.distinguishing ? 1 : 0;
  return static_cast<double>(count) / static_cast<double>(entries_.size());
}

double LevelBuffer::fraction_unsolvable() const {
  if (entries_.empty()) return 0.0;
  size_t count = 0;
  for (const BufferEntry& e : entries_) count += e.solvable ? 0 : 1;
  return static_cast<double>(count) / static_cast<double>(entries_.size());
}

// --- adversary config ---------------------------------------------------------------

std::string ued_method_name(UedMethod method) {
  switch (method) {
    case UedMethod::DomainRandomization: return "dr";
    case UedMethod::RobustPlr: return "plr";
    case UedMethod::Accel: return "accel";
  }
  throw ContractError("unknown ued method");
}

UedMethod ued_method_from_name(const std::string& name) {
  if (name == "dr") return UedMethod::DomainRandomization;
  if (name == "plr") return UedMethod::RobustPlr;
  if (name == "accel") return UedMethod::Accel;
  throw ValidationError("unknown ued method: " + name);
}

void AdversaryConfig::validate() const {
  if (replay_rate < 0.0 || replay_rate > 1.0) {
    throw ValidationError("replay_rate must lie in [0, 1]");
  }
  if (!(temperature > 0.0)) throw ValidationError("temperature must be positive");
  if (staleness_coeff < 0.0 || staleness_coeff > 1.0) {
    throw ValidationError("staleness_coeff must lie in [0, 1]");
  }
  if (buffer_capacity < 1) throw ValidationError("buffer_capacity must be at least 1");
  if (batch_size < 1) throw ValidationError("batch_size must be at least 1");
  if (rollout_length < 1) throw ValidationError("rollout_length must be at least 1");
  if (method == UedMethod::Accel) edit.validate();
}

// --- training step --------------------------------------------------------------------

namespace {

struct Segment {
  std::vector<Trajectory> episodes;
  std::vector<double> returns;  // true-reward discounted return per episode
  int64_t steps = 0;
};

/// Runs episodes back to back until the env-step budget is spent; the episode
/// in flight when the budget crosses zero runs to completion so every episode
/// is whole (policy-gradient updates need full returns).
Segment run_segment(const Level& level, const Policy& policy, const DiscountSpec& discount,
                    int budget, Rng& rng) {
  Segment seg;
  while (seg.steps < budget) {
    Trajectory traj = rollout(level, policy, discount, rng);
    seg.steps += static_cast<int64_t>(traj.steps.size());
    seg.returns.push_back(traj.discounted_return(RewardSelector::True, discount.gamma));
    seg.episodes.push_back(std::move(traj));
  }
  return seg;
}

double score_level(EstimatorKind estimator, const Level& level, double max_seen,
                   std::span<const double> returns, const DiscountSpec& discount) {
  switch (estimator) {
    case EstimatorKind::MaxLatest:
      return estimate_max_latest(max_seen, returns);
    case EstimatorKind::OracleLatest:
      return estimate_oracle_latest(oracle_max_return(level, discount), returns);
    case EstimatorKind::NegValue:
      return estimate_neg_value(returns);
  }
  throw ContractError("unknown estimator kind");
}

/// Rolls out a candidate level for scoring only and offers it to the buffer.
/// The learner is never updated here: that asymmetry is what makes the robust
/// methods robust.
void score_and_insert(TrainState& state, const Policy& policy, Level level,
                      const AdversaryConfig& config, const DiscountSpec& discount) {
  Segment seg = run_segment(level, policy, discount, config.rollout_length, state.rng);
  state.counters.env_steps += seg.steps;
  BufferEntry entry;
  entry.max_seen_return = *std::max_element(seg.returns.begin(), seg.returns.end());
  entry.score = score_level(config.estimator, level, entry.max_seen_return, seg.returns, discount);
  Classification cls = classify(level);
  entry.solvable = cls.goal_reachable;
  entry.distinguishing = approx_distinguishing(level);
  entry.last_touched = state.counters.iteration;
  entry.level = std::move(level);
  state.buffer.insert(std::move(entry));
}

size_t sample_index(std::span<const double> dist, Rng& rng) {
  double u = rng.uniform01();
  double acc = 0.0;
  for (size_t i = 0; i < dist.size(); ++i) {
    acc += dist[i];
    if (u < acc) return i;
  }
  return dist.size() - 1;
}

void dr_step(TrainState& state, Learner& learner, const MixtureSpec& mixture,
             const AdversaryConfig& config, const DiscountSpec& discount) {
  std::vector<Trajectory> batch;
  for (int b = 0; b < config.batch_size; ++b) {
    MixtureSample sample = sample_mixture(mixture, state.rng);
    Segment seg = run_segment(sample.level, learner.policy(), discount, config.rollout_length,
                              state.rng);
    state.counters.env_steps += seg.steps;
    state.counters.trained_levels += 1;
    state.counters.trained_distinguishing += approx_distinguishing(sample.level) ? 1 : 0;
    for (Trajectory& t : seg.episodes) batch.push_back(std::move(t));
  }
  learner.update(batch, discount);
}

void replay_step(TrainState& state, Learner& learner, const AdversaryConfig& config,
                 const DiscountSpec& discount) {
  std::vector<double> dist = state.buffer.replay_distribution(
      config.temperature, config.staleness_coeff, state.counters.iteration);
  std::vector<size_t> picks(static_cast<size_t>(config.batch_size));
  for (size_t& p : picks) p = sample_index(dist, state.rng);

  std::vector<Trajectory> batch;
  std::unordered_map<size_t, std::vector<double>> returns_by_entry;
  for (size_t pick : picks) {
    const BufferEntry& entry = state.buffer.entry(pick);
    Segment seg = run_segment(entry.level, learner.policy(), discount, config.rollout_length,
                              state.rng);
    state.counters.env_steps += seg.steps;
    state.counters.trained_levels += 1;
    state.counters.trained_distinguishing += entry.distinguishing ? 1 : 0;
    std::vector<double>& acc = returns_by_entry[pick];
    acc.insert(acc.end(), seg.returns.begin(), seg.returns.end());
    for (Trajectory& t : seg.episodes) batch.push_back(std::move(t));
  }

  learner.update(batch, discount);

  // Rescore with the pre-update rollouts and refresh staleness.
  for (const auto& [idx, returns] : returns_by_entry) {
    BufferEntry& entry = state.buffer.entry(idx);
    for (double r : returns) entry.max_seen_return = std::max(entry.max_seen_return, r);
    entry.score = score_level(config.estimator, entry.level, entry.max_seen_return, returns,
                              discount);
    entry.last_touched = state.counters.iteration;
  }

  if (config.method == UedMethod::Accel) {
    // Each replayed slot spawns one edited child, scored without updating.
    for (size_t pick : picks) {
      Level edited = apply_edit_sequence(state.buffer.entry(pick).level, config.edit, state.rng);
      score_and_insert(state, learner.policy(), std::move(edited), config, discount);
    }
  }
}

void generate_step(TrainState& state, Learner& learner, const MixtureSpec& mixture,
                   const AdversaryConfig& config, const DiscountSpec& discount) {
  for (int b = 0; b < config.batch_size; ++b) {
    MixtureSample sample = sample_mixture(mixture, state.rng);
    score_and_insert(state, learner.policy(), std::move(sample.level), config, discount);
  }
}

}  // namespace

void ued_step(TrainState& state, Learner& learner, const MixtureSpec& mixture,
              const AdversaryConfig& config, const DiscountSpec& discount) {
  config.validate();
  mixture.validate();
  discount.validate();
  state.counters.iteration += 1;
  if (config.method == UedMethod::DomainRandomization) {
    dr_step(state, learner, mixture, config, discount);
    return;
  }
  bool replay = state.buffer.size() > 0 && state.rng.bernoulli(config.replay_rate);
  if (replay) {
    replay_step(state, learner, config, discount);
  } else {
    generate_step(state, learner, mixture, config, discount);
  }
}

// --- metrics --------------------------------------------------------------------------

namespace {

constexpr const char* kMetricsHeader = "# regretlab-metrics v1";
constexpr const char* kMetricsColumns =
    "iteration,env_steps,trained_fraction_distinguishing,buffer_fraction_distinguishing,"
    "buffer_fraction_unsolvable,mean_eval_return_distinguishing,"
    "mean_eval_return_nondistinguishing,mean_eval_proxy_return";

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows) {
  out << kMetricsHeader << "\n" << kMetricsColumns << "\n";
  for (const MetricsRow& r : rows) {
    out << r.iteration << ',' << r.env_steps << ','
        << format_double(r.trained_fraction_distinguishing) << ','
        << format_double(r.buffer_fraction_distinguishing) << ','
        << format_double(r.buffer_fraction_unsolvable) << ','
        << format_double(r.mean_eval_return_distinguishing) << ','
        << format_double(r.mean_eval_return_nondistinguishing) << ','
        << format_double(r.mean_eval_proxy_return) << "\n";
  }
}

std::vector<MetricsRow> read_metrics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    throw ValidationError("unsupported metrics file header");
  }
  if (!std::getline(in, line) || line != kMetricsColumns) {
    throw ValidationError("unexpected metrics column layout");
  }
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 8) throw ValidationError("malformed metrics row: " + line);
    MetricsRow r;
    r.iteration = std::stoll(fields[0]);
    r.env_steps = std::stoll(fields[1]);
    r.trained_fraction_distinguishing = std::stod(fields[2]);
    r.buffer_fraction_distinguishing = std::stod(fields[3]);
    r.buffer_fraction_unsolvable = std::stod(fields[4]);
    r.mean_eval_return_distinguishing = std::stod(fields[5]);
    r.mean_eval_return_nondistinguishing = std::stod(fields[6]);
    r.mean_eval_proxy_return = std::stod(fields[7]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace regretlab
