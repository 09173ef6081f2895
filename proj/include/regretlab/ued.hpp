#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "regretlab/learners.hpp"
#include "regretlab/levelgen.hpp"
#include "regretlab/solvers.hpp"
#include "regretlab/value.hpp"

namespace regretlab {

// --- regret estimators ---------------------------------------------------------

enum class EstimatorKind : uint8_t {
  MaxLatest,     // max(0, best return ever seen on the level - latest mean return)
  OracleLatest,  // max(0, oracle max return - latest mean return)
  NegValue,      // -(latest mean return); unclamped, so a maximin adversary
};

std::string estimator_kind_name(EstimatorKind kind);
EstimatorKind estimator_kind_from_name(const std::string& name);

double mean_of(std::span<const double> values);

/// `max_seen` must already include the latest batch of returns.
double estimate_max_latest(double max_seen, std::span<const double> latest_returns);
double estimate_oracle_latest(double oracle_max, std::span<const double> latest_returns);
double estimate_neg_value(std::span<const double> latest_returns);

// --- level buffer ----------------------------------------------------------------

struct BufferEntry {
  Level level;
  double score = 0.0;
  double max_seen_return = 0.0;  // best true-reward return any rollout achieved
  int64_t last_touched = 0;      // iteration of the most recent visit
  int64_t insert_seq = 0;        // assigned by the buffer on insertion
  bool solvable = false;         // oracle says the true goal is reachable
  bool distinguishing = false;   // object-placement rule, cheap metric flag
};

/// Fixed-capacity score-ordered store. Insertion beyond capacity evicts the
/// lowest-score entry (oldest first on ties) and only if the candidate scores
/// strictly higher than that entry.
class LevelBuffer {
 public:
  explicit LevelBuffer(int capacity);

  bool insert(BufferEntry entry);
  size_t size() const { return entries_.size(); }
  int capacity() const { return capacity_; }
  const BufferEntry& entry(size_t i) const { return entries_.at(i); }
  BufferEntry& entry(size_t i) { return entries_.at(i); }
  const std::vector<BufferEntry>& entries() const { return entries_; }

  /// Replay probabilities: (1 - stale_mix) * rank-power weights + stale_mix *
  /// normalized staleness, where entry i at score rank r gets rank weight
  /// r^(-1/temperature) (rank 1 = highest score; ties broken by insertion
  /// order). Staleness weights fall back to uniform when every entry was
  /// touched this iteration.
  std::vector<double> replay_distribution(double temperature, double stale_mix,
                                          int64_t iteration) const;

  double fraction_distinguishing() const;
  double fraction_unsolvable() const;

 private:
  int capacity_;
  int64_t next_seq_ = 0;
  std::vector<BufferEntry> entries_;
};

// --- adversary configuration ------------------------------------------------------

enum class UedMethod : uint8_t {
  DomainRandomization,  // every batch is freshly generated and trained on
  RobustPlr,            // generate-without-update or replay-with-update
  Accel,                // RobustPlr plus edits of replayed levels
};

std::string ued_method_name(UedMethod method);
UedMethod ued_method_from_name(const std::string& name);

struct AdversaryConfig {
  UedMethod method = UedMethod::DomainRandomization;
  EstimatorKind estimator = EstimatorKind::MaxLatest;
  double replay_rate = 0.33;      // probability a step replays instead of generating
  double temperature = 0.1;       // rank-power temperature
  double staleness_coeff = 0.1;   // staleness mixture weight
  int buffer_capacity = 4096;
  int batch_size = 256;           // levels rolled out per step
  int rollout_length = 128;       // env-step budget per level visit
  EditSpec edit;                  // Accel only

  void validate() const;
};

// --- training loop -----------------------------------------------------------------

struct TrainCounters {
  int64_t iteration = 0;
  int64_t env_steps = 0;
  int64_t trained_levels = 0;          // levels whose rollouts fed learner updates
  int64_t trained_distinguishing = 0;  // subset carrying the distinguishing flag
};

struct TrainState {
  LevelBuffer buffer;
  TrainCounters counters;
  Rng rng;

  TrainState(int buffer_capacity, uint64_t seed) : buffer(buffer_capacity), rng(seed) {}
};

/// One adversary step: picks or produces a batch of levels, rolls the learner's
/// behavior policy on them, scores them, and (depending on the method and
/// phase) performs one learner update. Robust methods never update the learner
/// on freshly generated or freshly edited levels.
void ued_step(TrainState& state, Learner& learner, const MixtureSpec& mixture,
              const AdversaryConfig& config, const DiscountSpec& discount);

// --- metrics -------------------------------------------------------------------------

struct MetricsRow {
  int64_t iteration = 0;
  int64_t env_steps = 0;
  double trained_fraction_distinguishing = 0.0;  // cumulative, over update batches
  double buffer_fraction_distinguishing = 0.0;
  double buffer_fraction_unsolvable = 0.0;
  double mean_eval_return_distinguishing = 0.0;
  double mean_eval_return_nondistinguishing = 0.0;
  double mean_eval_proxy_return = 0.0;
};

void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows);
std::vector<MetricsRow> read_metrics_csv(std::istream& in);

}  // namespace regretlab
