#pragma once

#include <cstdint>
#include <vector>

#include "regretlab/level.hpp"
#include "regretlab/types.hpp"

namespace regretlab {

/// Runtime state shared by all three environments. Object bookkeeping uses
/// bitmasks over the level's key/chest arrays; unused fields stay zero.
struct EnvState {
  Cell mouse;
  bool cheese_collected = false;
  bool dish_collected = false;
  bool corner_visited = false;   // corner env: proxy reward fires on the flag's 0->1 edge
  uint16_t keys_remaining = 0;   // bit i set => level.keys[i] still on the board
  uint16_t chests_remaining = 0; // bit i set => level.chests[i] still closed
  int8_t inventory = 0;
  int8_t chests_opened = 0;
  int16_t step_count = 0;
  bool done = false;
};

struct StepResult {
  EnvState state;
  double true_reward = 0.0;
  double proxy_reward = 0.0;
};

/// Boolean observation tensor, kObsSize x kObsSize with a width-1 wall
/// border. Channel layout:
///   corner: walls, mouse, cheese
///   dish:   walls, mouse, cheese, dish x dish_channels
///   keys:   walls, mouse, chests, keys, inventory (top-row tally)
struct Observation {
  int channels = 0;
  std::vector<uint8_t> data;  // row-major [r][c][channel]

  uint8_t at(int r, int c, int ch) const {
    return data[(r * kObsSize + c) * channels + ch];
  }
  int size() const { return static_cast<int>(data.size()); }
};

int observation_channels(const Level& level);

EnvState reset(const Level& level);

/// Advance one step. Movement into walls or off-grid leaves the mouse in
/// place; collection checks run on the post-move cell; the terminal
/// transition still pays its rewards. Stepping a done state is a contract
/// error.
StepResult step(const Level& level, const EnvState& state, Action action);

Observation observe(const Level& level, const EnvState& state);

/// Packs the observation's booleans into 64-bit words and hashes them
/// (used by the tabular learner).
uint64_t observation_digest(const Observation& obs);

}  // namespace regretlab
