#include "regretlab/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace regretlab {

namespace {

constexpr Cell kCornerCell{0, 0};

int32_t normalize_distance(int32_t d) {
  return d > kMaxEpisodeSteps ? kDistanceInf : d;
}

Cell moved(const WallGrid& walls, Cell from, Action action) {
  int r = from.r + kActionDelta[static_cast<int>(action)][0];
  int c = from.c + kActionDelta[static_cast<int>(action)][1];
  if (!in_grid(r, c) || walls.at(r, c)) return from;
  return Cell{static_cast<int8_t>(r), static_cast<int8_t>(c)};
}

}  // namespace

DistanceTable all_pairs_distances(const WallGrid& walls) {
  DistanceTable table;
  table.d.assign(static_cast<size_t>(kGridCells) * kGridCells, kDistanceInf);
  auto at = [&table](int i, int j) -> int32_t& { return table.d[i * kGridCells + j]; };
  for (int r = 0; r < kGridSize; ++r)
    for (int c = 0; c < kGridSize; ++c) {
      if (walls.at(r, c)) continue;
      int i = r * kGridSize + c;
      at(i, i) = 0;
      for (Action a : kAllActions) {
        Cell n = moved(walls, Cell{static_cast<int8_t>(r), static_cast<int8_t>(c)}, a);
        int j = cell_index(n);
        if (j != i) at(i, j) = 1;
      }
    }
  for (int k = 0; k < kGridCells; ++k)
    for (int i = 0; i < kGridCells; ++i) {
      int32_t dik = at(i, k);
      if (dik == kDistanceInf) continue;
      const int32_t* dk = &table.d[k * kGridCells];
      int32_t* di = &table.d[i * kGridCells];
      for (int j = 0; j < kGridCells; ++j) {
        if (dk[j] == kDistanceInf) continue;
        int32_t through = dik + dk[j];
        if (through < di[j]) di[j] = through;
      }
    }
  for (int32_t& d : table.d) d = normalize_distance(d);
  return table;
}

std::array<int32_t, kGridCells> distance_field(const WallGrid& walls, Cell source,
                                               std::optional<Cell> treat_as_wall) {
  std::array<int32_t, kGridCells> dist;
  dist.fill(kDistanceInf);
  if (walls.at(source)) return dist;
  std::deque<Cell> frontier;
  dist[cell_index(source)] = 0;
  frontier.push_back(source);
  while (!frontier.empty()) {
    Cell p = frontier.front();
    frontier.pop_front();
    int32_t dp = dist[cell_index(p)];
    for (Action a : kAllActions) {
      Cell n = moved(walls, p, a);
      if (n == p) continue;
      if (treat_as_wall && n == *treat_as_wall) continue;
      int ni = cell_index(n);
      if (dist[ni] != kDistanceInf) continue;
      dist[ni] = dp + 1;
      frontier.push_back(n);
    }
  }
  for (int32_t& d : dist) d = normalize_distance(d);
  return dist;
}

namespace {

double return_for_distance(int32_t d, const DiscountSpec& discount) {
  if (d == kDistanceInf || d > discount.max_steps) return 0.0;
  return std::pow(discount.gamma, d - 1);
}

}  // namespace

double max_return_corner(const CornerLevel& level, const DiscountSpec& discount) {
  discount.validate();
  auto field = distance_field(level.walls, level.mouse_spawn);
  return return_for_distance(field[cell_index(level.cheese)], discount);
}

double max_return_dish(const DishLevel& level, const DiscountSpec& discount) {
  discount.validate();
  std::optional<Cell> block;
  if (!(level.dish == level.cheese)) block = level.dish;
  auto field = distance_field(level.walls, level.mouse_spawn, block);
  return return_for_distance(field[cell_index(level.cheese)], discount);
}

uint64_t collection_sequence_count(int k, int c) {
  if (k < 1 || k > kMaxKeys || c < 1 || c > kMaxChests)
    throw ValidationError("collection sequences: k and c must be in [1, 10]");
  int m = std::min(k, c);
  auto falling = [](int n, int r) {
    uint64_t p = 1;
    for (int i = 0; i < r; ++i) p *= static_cast<uint64_t>(n - i);
    return p;
  };
  // Catalan(m) = C(2m, m) / (m + 1)
  uint64_t catalan = 1;
  for (int i = 0; i < m; ++i) catalan = catalan * (2 * m - i) / (i + 1);
  catalan /= static_cast<uint64_t>(m) + 1;
  return falling(k, m) * falling(c, m) * catalan;
}

std::vector<CollectionSequence> enumerate_collection_sequences(int k, int c) {
  uint64_t count = collection_sequence_count(k, c);
  constexpr uint64_t kEnumerationCap = 10'000'000;
  if (count > kEnumerationCap)
    throw CapacityError("collection sequences: too many to enumerate for (k=" +
                        std::to_string(k) + ", c=" + std::to_string(c) + ")");
  int m = std::min(k, c);
  std::vector<CollectionSequence> out;
  out.reserve(count);
  CollectionSequence seq;
  seq.reserve(2 * m);
  std::vector<bool> key_used(k, false), chest_used(c, false);
  int keys_taken = 0, chests_taken = 0;

  auto recurse = [&](auto&& self) -> void {
    if (static_cast<int>(seq.size()) == 2 * m) {
      out.push_back(seq);
      return;
    }
    if (keys_taken < m) {
      for (int i = 0; i < k; ++i) {
        if (key_used[i]) continue;
        key_used[i] = true;
        ++keys_taken;
        seq.push_back(CollectionStep{false, static_cast<int8_t>(i)});
        self(self);
        seq.pop_back();
        --keys_taken;
        key_used[i] = false;
      }
    }
    if (chests_taken < keys_taken) {  // every prefix needs keys >= chests
      for (int i = 0; i < c; ++i) {
        if (chest_used[i]) continue;
        chest_used[i] = true;
        ++chests_taken;
        seq.push_back(CollectionStep{true, static_cast<int8_t>(i)});
        self(self);
        seq.pop_back();
        --chests_taken;
        chest_used[i] = false;
      }
    }
  };
  recurse(recurse);
  return out;
}

namespace {

/// Distances between the keys-level waypoints: node 0 is the spawn, nodes
/// 1..k the keys, nodes k+1..k+c the chests.
std::vector<int32_t> waypoint_distances(const KeysLevel& level, const DistanceTable& table) {
  std::vector<Cell> nodes;
  nodes.push_back(level.mouse_spawn);
  nodes.insert(nodes.end(), level.keys.begin(), level.keys.end());
  nodes.insert(nodes.end(), level.chests.begin(), level.chests.end());
  size_t n = nodes.size();
  std::vector<int32_t> d(n * n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) d[i * n + j] = table.at(nodes[i], nodes[j]);
  return d;
}

double sequence_return(const CollectionSequence& seq, const std::vector<int32_t>& dist,
                       size_t n_nodes, int k, const DiscountSpec& discount) {
  double value = 0.0;
  size_t at = 0;  // spawn
  int64_t steps = 0;
  for (const CollectionStep& s : seq) {
    size_t node = s.chest ? static_cast<size_t>(1 + k + s.index) : static_cast<size_t>(1 + s.index);
    int32_t leg = dist[at * n_nodes + node];
    if (leg == kDistanceInf) break;
    steps += leg;
    if (steps > discount.max_steps) break;
    if (s.chest) value += std::pow(discount.gamma, static_cast<double>(steps - 1));
    at = node;
  }
  return value;
}

}  // namespace

double max_return_keys(const KeysLevel& level, const DiscountSpec& discount) {
  discount.validate();
  int k = static_cast<int>(level.keys.size());
  int c = static_cast<int>(level.chests.size());
  DistanceTable table = all_pairs_distances(level.walls);
  std::vector<int32_t> dist = waypoint_distances(level, table);
  size_t n_nodes = 1 + level.keys.size() + level.chests.size();
  double best = 0.0;
  for (const CollectionSequence& seq : enumerate_collection_sequences(k, c))
    best = std::max(best, sequence_return(seq, dist, n_nodes, k, discount));
  return best;
}

double oracle_max_return(const Level& level, const DiscountSpec& discount) {
  validate_level(level);
  switch (level_kind(level)) {
    case EnvKind::Corner: return max_return_corner(std::get<CornerLevel>(level), discount);
    case EnvKind::Dish: return max_return_dish(std::get<DishLevel>(level), discount);
    case EnvKind::Keys: return max_return_keys(std::get<KeysLevel>(level), discount);
  }
  throw ContractError("oracle_max_return: bad kind");
}

const char* class_kind_name(ClassKind kind) {
  switch (kind) {
    case ClassKind::NonDistinguishing: return "nd";
    case ClassKind::Distinguishing: return "d";
    case ClassKind::Unclassified: return "unclassified";
  }
  throw ContractError("class_kind_name: bad kind");
}

Classification classify(const Level& level) {
  validate_level(level);
  Classification out;
  DiscountSpec discount;  // defaults carry the shared cap
  if (const auto* l = std::get_if<CornerLevel>(&level)) {
    auto field = distance_field(l->walls, l->mouse_spawn);
    out.goal_reachable = field[cell_index(l->cheese)] != kDistanceInf;
    out.proxy_reachable = field[cell_index(kCornerCell)] != kDistanceInf;
    bool nd = l->cheese == kCornerCell || !out.goal_reachable;
    out.kind = nd ? ClassKind::NonDistinguishing : ClassKind::Distinguishing;
  } else if (const auto* l = std::get_if<DishLevel>(&level)) {
    out.goal_reachable = max_return_dish(*l, discount) > 0.0;
    std::optional<Cell> block;
    if (!(l->cheese == l->dish)) block = l->cheese;
    auto proxy_field = distance_field(l->walls, l->mouse_spawn, block);
    out.proxy_reachable = proxy_field[cell_index(l->dish)] != kDistanceInf;
    bool nd = l->cheese == l->dish || !out.goal_reachable;
    out.kind = nd ? ClassKind::NonDistinguishing : ClassKind::Distinguishing;
  } else if (const auto* l = std::get_if<KeysLevel>(&level)) {
    size_t k = l->keys.size(), c = l->chests.size();
    if (k == 3 && c == 10)
      out.kind = ClassKind::NonDistinguishing;
    else if (k == 10 && c == 3)
      out.kind = ClassKind::Distinguishing;
    else
      out.kind = ClassKind::Unclassified;
    out.goal_reachable = max_return_keys(*l, discount) > 0.0;
    auto field = distance_field(l->walls, l->mouse_spawn);
    for (Cell key : l->keys)
      if (field[cell_index(key)] != kDistanceInf) {
        out.proxy_reachable = true;
        break;
      }
  }
  return out;
}

bool approx_distinguishing(const Level& level) {
  if (const auto* l = std::get_if<CornerLevel>(&level)) return !(l->cheese == kCornerCell);
  if (const auto* l = std::get_if<DishLevel>(&level)) return !(l->cheese == l->dish);
  const auto& l = std::get<KeysLevel>(level);
  return l.keys.size() > l.chests.size();
}

// --- scripted policies -------------------------------------------------------

struct ScriptedPolicy::Plan {
  uint64_t digest = 0;
  std::array<int32_t, kGridCells> field{};                   // corner and dish
  std::vector<std::array<int32_t, kGridCells>> key_fields;   // keys
  std::vector<std::array<int32_t, kGridCells>> chest_fields;
  CollectionSequence best_sequence;  // keys, true goal
};

namespace {

std::array<int32_t, kGridCells> all_inf_field() {
  std::array<int32_t, kGridCells> f;
  f.fill(kDistanceInf);
  return f;
}

/// First action (in declaration order) that strictly approaches the target
/// along the BFS field; Up when already there or the target is unreachable.
Action follow_field(const WallGrid& walls, const std::array<int32_t, kGridCells>& field, Cell at) {
  int32_t here = field[cell_index(at)];
  if (here == kDistanceInf || here == 0) return Action::Up;
  for (Action a : kAllActions) {
    Cell n = moved(walls, at, a);
    if (n == at) continue;
    if (field[cell_index(n)] == here - 1) return a;
  }
  return Action::Up;
}

std::shared_ptr<const ScriptedPolicy::Plan> build_plan(const Level& level, RewardSelector goal,
                                                       uint64_t digest);

}  // namespace

ActionDist ScriptedPolicy::action_dist(const Level& level, const EnvState& state) const {
  uint64_t digest = level_digest(level);
  std::shared_ptr<const Plan> plan;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (!plan_ || plan_->digest != digest) plan_ = build_plan(level, goal_, digest);
    plan = plan_;
  }

  const WallGrid& walls = level_walls(level);
  Action chosen = Action::Up;
  if (level_kind(level) != EnvKind::Keys) {
    chosen = follow_field(walls, plan->field, state.mouse);
  } else {
    const auto& l = std::get<KeysLevel>(level);
    const std::array<int32_t, kGridCells>* target = nullptr;
    if (goal_ == RewardSelector::True) {
      // Walk the planned sequence, skipping anything already collected; if the
      // next planned chest cannot be opened yet, detour to a remaining key.
      for (const CollectionStep& s : plan->best_sequence) {
        bool remaining = s.chest ? (state.chests_remaining >> s.index) & 1
                                 : (state.keys_remaining >> s.index) & 1;
        if (!remaining) continue;
        if (s.chest && state.inventory == 0) break;  // fall through to key detour
        target = s.chest ? &plan->chest_fields[s.index] : &plan->key_fields[s.index];
        break;
      }
      if (!target && state.keys_remaining) {
        for (size_t i = 0; i < l.keys.size(); ++i)
          if ((state.keys_remaining >> i) & 1) {
            target = &plan->key_fields[i];
            break;
          }
      }
    } else {
      // Greedy: nearest remaining key, then nearest remaining chest.
      int32_t best = kDistanceInf;
      for (size_t i = 0; i < l.keys.size(); ++i) {
        if (!((state.keys_remaining >> i) & 1)) continue;
        int32_t d = plan->key_fields[i][cell_index(state.mouse)];
        if (d < best) {
          best = d;
          target = &plan->key_fields[i];
        }
      }
      if (!target) {
        for (size_t i = 0; i < l.chests.size(); ++i) {
          if (!((state.chests_remaining >> i) & 1)) continue;
          int32_t d = plan->chest_fields[i][cell_index(state.mouse)];
          if (d < best) {
            best = d;
            target = &plan->chest_fields[i];
          }
        }
      }
    }
    if (target) chosen = follow_field(walls, *target, state.mouse);
  }

  ActionDist dist{0, 0, 0, 0};
  dist[static_cast<int>(chosen)] = 1.0;
  return dist;
}

namespace {

std::shared_ptr<const ScriptedPolicy::Plan> build_plan(const Level& level, RewardSelector goal,
                                                       uint64_t digest) {
  auto plan = std::make_shared<ScriptedPolicy::Plan>();
  plan->digest = digest;
  const WallGrid& walls = level_walls(level);
  if (const auto* l = std::get_if<CornerLevel>(&level)) {
    if (goal == RewardSelector::True) {
      plan->field = distance_field(walls, l->cheese);
    } else {
      plan->field =
          walls.at(kCornerCell) ? all_inf_field() : distance_field(walls, kCornerCell);
    }
  } else if (const auto* l = std::get_if<DishLevel>(&level)) {
    Cell target = goal == RewardSelector::True ? l->cheese : l->dish;
    Cell other = goal == RewardSelector::True ? l->dish : l->cheese;
    std::optional<Cell> block;
    if (!(target == other)) block = other;
    plan->field = distance_field(walls, target, block);
  } else {
    const auto& kl = std::get<KeysLevel>(level);
    for (Cell key : kl.keys) plan->key_fields.push_back(distance_field(walls, key));
    for (Cell chest : kl.chests) plan->chest_fields.push_back(distance_field(walls, chest));
    if (goal == RewardSelector::True) {
      DiscountSpec discount;
      DistanceTable table = all_pairs_distances(walls);
      std::vector<int32_t> dist = waypoint_distances(kl, table);
      size_t n_nodes = 1 + kl.keys.size() + kl.chests.size();
      double best = -1.0;
      for (const CollectionSequence& seq :
           enumerate_collection_sequences(static_cast<int>(kl.keys.size()),
                                          static_cast<int>(kl.chests.size()))) {
        double v = sequence_return(seq, dist, n_nodes, static_cast<int>(kl.keys.size()), discount);
        if (v > best) {
          best = v;
          plan->best_sequence = seq;
        }
      }
    }
  }
  return plan;
}

}  // namespace

std::unique_ptr<Policy> scripted_policy(RewardSelector goal) {
  return std::make_unique<ScriptedPolicy>(goal);
}

}  // namespace regretlab
