#pragma once

#include <array>
#include <cstdint>

#include "regretlab/errors.hpp"

namespace regretlab {

/// Interior maze cells per side. Observations add a one-cell border.
inline constexpr int kGridSize = 13;
inline constexpr int kGridCells = kGridSize * kGridSize;
inline constexpr int kObsSize = kGridSize + 2;

/// Hard episode cap shared by all grid environments.
inline constexpr int kMaxEpisodeSteps = 128;

/// Action order is load-bearing: scripted policies break ties by this order
/// and learners index their outputs by it.
enum class Action : uint8_t { Up = 0, Left = 1, Down = 2, Right = 3 };
inline constexpr int kNumActions = 4;
inline constexpr std::array<Action, 4> kAllActions = {Action::Up, Action::Left,
                                                      Action::Down, Action::Right};

struct Cell {
  int8_t r = 0;
  int8_t c = 0;
  bool operator==(const Cell&) const = default;
};

inline bool in_grid(int r, int c) {
  return r >= 0 && r < kGridSize && c >= 0 && c < kGridSize;
}
inline int cell_index(Cell p) { return p.r * kGridSize + p.c; }
inline Cell cell_from_index(int i) {
  return Cell{static_cast<int8_t>(i / kGridSize), static_cast<int8_t>(i % kGridSize)};
}

/// Offset of each action, indexed by Action.
inline constexpr std::array<std::array<int, 2>, 4> kActionDelta = {{
    {-1, 0},  // Up
    {0, -1},  // Left
    {1, 0},   // Down
    {0, 1},   // Right
}};

/// 13x13 wall mask, one bitmask row per grid row.
struct WallGrid {
  std::array<uint16_t, kGridSize> rows{};

  bool at(int r, int c) const { return (rows[r] >> c) & 1; }
  bool at(Cell p) const { return at(p.r, p.c); }
  void set(int r, int c, bool wall) {
    if (wall)
      rows[r] |= static_cast<uint16_t>(1u << c);
    else
      rows[r] &= static_cast<uint16_t>(~(1u << c));
  }
  void set(Cell p, bool wall) { set(p.r, p.c, wall); }
  int count() const {
    int n = 0;
    for (uint16_t row : rows) n += __builtin_popcount(row);
    return n;
  }
  bool operator==(const WallGrid&) const = default;
};

/// Discounting contract for returns. max_steps is the episode cap used by
/// rollouts and exact evaluation alike.
struct DiscountSpec {
  double gamma = 0.999;
  int max_steps = kMaxEpisodeSteps;

  void validate() const {
    if (!(gamma > 0.0 && gamma < 1.0))
      throw ValidationError("DiscountSpec: gamma must be in (0, 1)");
    if (max_steps < 1 || max_steps > kMaxEpisodeSteps)
      throw ValidationError("DiscountSpec: max_steps must be in [1, 128]");
  }
};

enum class RewardSelector : uint8_t { True = 0, Proxy = 1 };

}  // namespace regretlab
