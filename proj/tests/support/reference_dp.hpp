#pragma once

// Test-side reference solvers, kept deliberately independent of the library's
// oracle formulas: best returns are recovered by finite-horizon dynamic
// programming directly on the environment's step() transitions, and
// distances by a plain queue-based BFS.

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <unordered_map>

#include "regretlab/env.hpp"
#include "regretlab/value.hpp"

namespace regretlab::testing {

inline uint64_t pack_state(const EnvState& s, int t) {
  uint64_t k = static_cast<uint64_t>(cell_index(s.mouse));
  k |= static_cast<uint64_t>(s.cheese_collected) << 8;
  k |= static_cast<uint64_t>(s.dish_collected) << 9;
  k |= static_cast<uint64_t>(s.corner_visited) << 10;
  k |= static_cast<uint64_t>(s.keys_remaining) << 11;
  k |= static_cast<uint64_t>(s.chests_remaining) << 27;
  k |= static_cast<uint64_t>(static_cast<uint8_t>(s.inventory)) << 43;
  k |= static_cast<uint64_t>(static_cast<uint8_t>(s.chests_opened)) << 51;
  k |= static_cast<uint64_t>(t) << 56;
  return k;
}

class ReferenceDp {
 public:
  ReferenceDp(const Level& level, const DiscountSpec& discount, RewardSelector sel)
      : level_(level), discount_(discount), sel_(sel) {}

  double best_return() { return value(reset(level_), 0); }

 private:
  double value(EnvState state, int t) {
    if (state.done || t >= discount_.max_steps) return 0.0;
    uint64_t key = pack_state(state, t);
    auto hit = memo_.find(key);
    if (hit != memo_.end()) return hit->second;
    state.step_count = static_cast<int16_t>(t);
    double best = -1.0;
    for (Action a : kAllActions) {
      StepResult res = step(level_, state, a);
      double r = sel_ == RewardSelector::True ? res.true_reward : res.proxy_reward;
      double v = r + discount_.gamma * value(res.state, t + 1);
      if (v > best) best = v;
    }
    memo_.emplace(key, best);
    return best;
  }

  Level level_;
  DiscountSpec discount_;
  RewardSelector sel_;
  std::unordered_map<uint64_t, double> memo_;
};

inline double dp_best_return(const Level& level, const DiscountSpec& discount,
                             RewardSelector sel = RewardSelector::True) {
  return ReferenceDp(level, discount, sel).best_return();
}

/// Plain BFS over free cells, the slow-and-obvious counterpart to the
/// library's distance routines. Unreachable cells come back as -1, and
/// `blocked` only forbids entering a cell (the source itself still counts).
inline std::array<int, kGridCells> bfs_distances(const WallGrid& walls, Cell source,
                                                 std::optional<Cell> blocked = std::nullopt) {
  std::array<int, kGridCells> dist;
  dist.fill(-1);
  if (walls.at(source)) return dist;
  std::deque<Cell> queue{source};
  dist[cell_index(source)] = 0;
  while (!queue.empty()) {
    Cell cur = queue.front();
    queue.pop_front();
    for (const auto& d : kActionDelta) {
      int nr = cur.r + d[0], nc = cur.c + d[1];
      if (!in_grid(nr, nc) || walls.at(nr, nc)) continue;
      Cell nxt{static_cast<int8_t>(nr), static_cast<int8_t>(nc)};
      if (blocked && *blocked == nxt) continue;
      if (dist[cell_index(nxt)] >= 0) continue;
      dist[cell_index(nxt)] = dist[cell_index(cur)] + 1;
      queue.push_back(nxt);
    }
  }
  return dist;
}

}  // namespace regretlab::testing
