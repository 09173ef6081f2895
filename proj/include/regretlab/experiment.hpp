#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "regretlab/config.hpp"
#include "regretlab/solvers.hpp"

namespace regretlab {

/// Fixed per-subsystem streams split off the root seed. Recorded in the run
/// manifest so a replay reconstructs the identical randomness tree.
enum class SeedStream : uint64_t {
  Train = 0,       // adversary + learner rollouts
  EvalLevels = 1,  // held-out evaluation level sets
  EvalRollouts = 2,
  Learner = 3,  // learner-internal exploration
};

struct RunArtifacts {
  std::string metrics_path;
  std::string snapshot_path;
  std::string manifest_path;
  std::vector<MetricsRow> rows;
};

/// Executes the configured training run: builds the generator mixture and the
/// held-out eval sets, steps the adversary, evaluates on the configured
/// cadence, and writes metrics.csv, snapshot.txt, and manifest.json under
/// config.output_dir. Rows are emitted every iteration; between evaluations
/// the eval columns repeat the latest measured values.
RunArtifacts run_experiment(const RunConfig& config);

/// Reads a manifest, re-runs its config with outputs redirected to
/// `replay_dir`, and compares metrics.csv and snapshot.txt byte for byte
/// against the original run. Returns true when both match.
bool replay_run(const std::string& manifest_path, const std::string& replay_dir);

/// Level sets used for held-out evaluation: `distinguishing` holds solvable
/// levels the ground-truth classifier marks distinguishing, `plain` solvable
/// non-distinguishing ones.
struct EvalSets {
  std::vector<Level> distinguishing;
  std::vector<Level> plain;
};

/// Rejection-samples levels from the config's generators until each set has
/// config.eval.n_levels members (classified exactly, unsolvable discarded).
EvalSets build_eval_sets(const RunConfig& config, uint64_t seed);

// --- cheese-position heatmap -------------------------------------------------

/// Mean return per cheese position over a fixed wall layout and spawn. Wall
/// cells and the spawn cell are masked; every free non-spawn cell gets the
/// mean evaluation return of the level variant whose cheese sits there.
struct HeatmapGrid {
  WallGrid walls;
  Cell spawn;
  std::vector<double> values;  // kGridCells; 0.0 on masked cells
  std::vector<char> masked;    // kGridCells; 1 = wall or spawn

  int masked_count() const;
};

HeatmapGrid emit_heatmap(const Policy& policy, const CornerLevel& base,
                         const EvalProtocol& protocol, const DiscountSpec& discount,
                         uint64_t seed);

void write_heatmap_json(std::ostream& out, const HeatmapGrid& grid);
HeatmapGrid read_heatmap_json(std::istream& in);

}  // namespace regretlab
