#pragma once

#include <cstdint>
#include <string>

#include "regretlab/learners.hpp"
#include "regretlab/levelgen.hpp"
#include "regretlab/ued.hpp"

namespace regretlab {

/// Format version stamped into configs, manifests, and heatmap files.
/// Readers reject any other value.
inline constexpr int kConfigFormatVersion = 1;

struct TrainSpec {
  int64_t steps = 100;     // adversary iterations
  int64_t eval_every = 10; // evaluation cadence in iterations

  void validate() const;
};

struct EvalSpec {
  int n_levels = 32;  // per held-out eval set
  EvalProtocol protocol;

  void validate() const;
};

/// One experiment, fully specified. Parsing is strict: unknown keys anywhere
/// in the document are rejected, as are unknown format versions. Serialization
/// emits every field, so parse -> serialize -> parse is the identity.
struct RunConfig {
  uint64_t seed = 0;
  EnvKind env = EnvKind::Corner;
  DiscountSpec discount;  // gamma defaults to 0.999

  // Generator section.
  double alpha = 0.0;  // mass on the distinguishing generator
  double wall_probability = 0.25;
  int active_size = kGridSize;
  int corner_region = kGridSize;
  int dish_channels = 6;

  AdversaryConfig adversary;
  LearnerConfig learner;
  TrainSpec train;
  EvalSpec eval;
  std::string output_dir = "runs/out";

  /// The alpha-mixture this config trains on.
  MixtureSpec mixture() const;

  void validate() const;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);
std::string serialize_run_config(const RunConfig& config);

/// FNV-1a over the canonical serialization; manifests record it so replays
/// can detect drifted configs.
uint64_t config_digest(const RunConfig& config);

}  // namespace regretlab
