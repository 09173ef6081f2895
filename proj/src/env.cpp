#include "regretlab/env.hpp"

#include <algorithm>

#include "regretlab/rng.hpp"

namespace regretlab {

namespace {

constexpr Cell kCornerCell{0, 0};

Cell attempt_move(const WallGrid& walls, Cell from, Action action) {
  int r = from.r + kActionDelta[static_cast<int>(action)][0];
  int c = from.c + kActionDelta[static_cast<int>(action)][1];
  if (!in_grid(r, c) || walls.at(r, c)) return from;
  return Cell{static_cast<int8_t>(r), static_cast<int8_t>(c)};
}

}  // namespace

int observation_channels(const Level& level) {
  switch (level_kind(level)) {
    case EnvKind::Corner: return 3;
    case EnvKind::Dish: return 3 + std::get<DishLevel>(level).dish_channels;
    case EnvKind::Keys: return 5;
  }
  throw ContractError("observation_channels: bad kind");
}

EnvState reset(const Level& level) {
  validate_level(level);
  EnvState s;
  s.mouse = level_spawn(level);
  if (const auto* l = std::get_if<KeysLevel>(&level)) {
    s.keys_remaining = static_cast<uint16_t>((1u << l->keys.size()) - 1);
    s.chests_remaining = static_cast<uint16_t>((1u << l->chests.size()) - 1);
  }
  // Spawning on the corner counts as having visited it, so the proxy reward
  // never fires in that episode (rewards attach to transitions only).
  if (level_kind(level) == EnvKind::Corner && s.mouse == kCornerCell)
    s.corner_visited = true;
  return s;
}

StepResult step(const Level& level, const EnvState& state, Action action) {
  if (state.done) throw ContractError("step: episode already terminated");
  StepResult res;
  EnvState& s = res.state;
  s = state;
  s.mouse = attempt_move(level_walls(level), state.mouse, action);
  s.step_count = static_cast<int16_t>(state.step_count + 1);

  if (const auto* l = std::get_if<CornerLevel>(&level)) {
    if (s.mouse == l->cheese) {
      s.cheese_collected = true;
      res.true_reward = 1.0;
      s.done = true;
    }
    if (!s.corner_visited && s.mouse == kCornerCell) {
      s.corner_visited = true;
      res.proxy_reward = 1.0;
    }
  } else if (const auto* l = std::get_if<DishLevel>(&level)) {
    // Cheese is checked before the dish; the order only matters when the two
    // are co-located, where both collect on the same arrival.
    if (s.mouse == l->cheese) {
      s.cheese_collected = true;
      res.true_reward = 1.0;
      s.done = true;
    }
    if (s.mouse == l->dish) {
      s.dish_collected = true;
      res.proxy_reward = 1.0;
      s.done = true;
    }
  } else if (const auto* l = std::get_if<KeysLevel>(&level)) {
    for (size_t i = 0; i < l->keys.size(); ++i) {
      if ((s.keys_remaining >> i & 1) && s.mouse == l->keys[i]) {
        s.keys_remaining = static_cast<uint16_t>(s.keys_remaining & ~(1u << i));
        s.inventory += 1;
        // Proxy goal: picking up a key is itself rewarding.
        res.proxy_reward = 1.0;
      }
    }
    for (size_t i = 0; i < l->chests.size(); ++i) {
      if ((s.chests_remaining >> i & 1) && s.mouse == l->chests[i] && s.inventory > 0) {
        s.chests_remaining = static_cast<uint16_t>(s.chests_remaining & ~(1u << i));
        s.inventory -= 1;
        s.chests_opened += 1;
        res.true_reward = 1.0;
        res.proxy_reward = 1.0;
      }
    }
    int quota = static_cast<int>(std::min(l->keys.size(), l->chests.size()));
    if (s.chests_opened >= quota) s.done = true;
  }

  if (s.step_count >= kMaxEpisodeSteps) s.done = true;
  return res;
}

Observation observe(const Level& level, const EnvState& state) {
  Observation obs;
  obs.channels = observation_channels(level);
  obs.data.assign(static_cast<size_t>(kObsSize) * kObsSize * obs.channels, 0);
  auto set = [&obs](int r, int c, int ch) {
    obs.data[(r * kObsSize + c) * obs.channels + ch] = 1;
  };
  // Channel 0: walls, with the surrounding border always present.
  const WallGrid& walls = level_walls(level);
  for (int r = 0; r < kObsSize; ++r)
    for (int c = 0; c < kObsSize; ++c) {
      bool border = r == 0 || c == 0 || r == kObsSize - 1 || c == kObsSize - 1;
      if (border || walls.at(r - 1, c - 1)) set(r, c, 0);
    }
  // Channel 1: mouse.
  set(state.mouse.r + 1, state.mouse.c + 1, 1);

  if (const auto* l = std::get_if<CornerLevel>(&level)) {
    if (!state.cheese_collected) set(l->cheese.r + 1, l->cheese.c + 1, 2);
  } else if (const auto* l = std::get_if<DishLevel>(&level)) {
    if (!state.cheese_collected) set(l->cheese.r + 1, l->cheese.c + 1, 2);
    if (!state.dish_collected)
      for (int ch = 0; ch < l->dish_channels; ++ch) set(l->dish.r + 1, l->dish.c + 1, 3 + ch);
  } else if (const auto* l = std::get_if<KeysLevel>(&level)) {
    for (size_t i = 0; i < l->chests.size(); ++i)
      if (state.chests_remaining >> i & 1) set(l->chests[i].r + 1, l->chests[i].c + 1, 2);
    for (size_t i = 0; i < l->keys.size(); ++i)
      if (state.keys_remaining >> i & 1) set(l->keys[i].r + 1, l->keys[i].c + 1, 3);
    for (int i = 0; i < state.inventory; ++i) set(0, i, 4);
  }
  return obs;
}

uint64_t observation_digest(const Observation& obs) {
  uint64_t h = mix64(0x0b5e0b5e, static_cast<uint64_t>(obs.channels));
  uint64_t word = 0;
  int bits = 0;
  for (uint8_t v : obs.data) {
    word = (word << 1) | (v & 1);
    if (++bits == 64) {
      h = mix64(h, word);
      word = 0;
      bits = 0;
    }
  }
  if (bits) h = mix64(h, word);
  return h;
}

}  // namespace regretlab
