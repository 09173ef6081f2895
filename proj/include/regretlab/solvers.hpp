#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "regretlab/policy.hpp"

namespace regretlab {

/// Sentinel for "no path". Any shortest path longer than the episode cap is
/// normalized to this value, because it cannot be realized in an episode.
inline constexpr int32_t kDistanceInf = 1'000'000'000;

/// All-pairs shortest walking distances between grid cells (walls excluded),
/// row-major by cell index.
struct DistanceTable {
  std::vector<int32_t> d;  // kGridCells * kGridCells

  int32_t at(int from, int to) const { return d[from * kGridCells + to]; }
  int32_t at(Cell from, Cell to) const { return at(cell_index(from), cell_index(to)); }
};

/// Floyd-Warshall over the free cells. Entries above the episode cap come
/// back as kDistanceInf.
DistanceTable all_pairs_distances(const WallGrid& walls);

/// Single-source BFS distances; `treat_as_wall` adds one extra obstruction
/// (used for the dish, which ends the episode when stepped on).
std::array<int32_t, kGridCells> distance_field(const WallGrid& walls, Cell source,
                                               std::optional<Cell> treat_as_wall = std::nullopt);

// --- Exact best-achievable true returns --------------------------------------
//
// For the corner and dish environments the optimum is gamma^(d-1) for the
// shortest feasible path of d steps (0 when unreachable). For keys, the
// optimum is the best viable collection sequence.

double max_return_corner(const CornerLevel& level, const DiscountSpec& discount);
double max_return_dish(const DishLevel& level, const DiscountSpec& discount);
double max_return_keys(const KeysLevel& level, const DiscountSpec& discount);

/// Kind-dispatched best true return; usable as a MaxReturnFn.
double oracle_max_return(const Level& level, const DiscountSpec& discount);

/// One pickup or chest-opening event in a keys plan.
struct CollectionStep {
  bool chest = false;
  int8_t index = 0;  // into level.keys or level.chests
};
using CollectionSequence = std::vector<CollectionStep>;

/// All viable collection sequences for k keys and c chests: ordered
/// m-subsets of each (m = min(k, c)) interleaved so every prefix has at
/// least as many keys as chests. Count is P(k,m) * P(c,m) * Catalan(m).
std::vector<CollectionSequence> enumerate_collection_sequences(int k, int c);

/// Count without materializing (closed form).
uint64_t collection_sequence_count(int k, int c);

enum class ClassKind : uint8_t { NonDistinguishing = 0, Distinguishing = 1, Unclassified = 2 };

const char* class_kind_name(ClassKind kind);

struct Classification {
  ClassKind kind = ClassKind::NonDistinguishing;
  bool goal_reachable = false;   // best true return > 0
  bool proxy_reachable = false;  // corner/dish/key reachable within the cap
};

/// Ground-truth level classification. Corner: non-distinguishing iff the
/// cheese sits on the corner or cannot be reached. Dish: iff cheese and dish
/// coincide or the cheese cannot be reached around the dish. Keys levels are
/// classified by their (k, c) signature; non-canonical counts are
/// Unclassified.
Classification classify(const Level& level);

/// Cheap position-rule classification used for metrics streams (corner:
/// cheese off the corner; dish: cheese apart from dish; keys: k > c).
bool approx_distinguishing(const Level& level);

/// Deterministic reference policies. True pursues the true goal (shortest
/// path to cheese, or the best collection sequence); Proxy pursues the proxy
/// goal (corner / dish / greedy key collection). Ties break in action order
/// Up, Left, Down, Right; when the target is unreachable the policy holds a
/// fixed action.
class ScriptedPolicy final : public Policy {
 public:
  struct Plan;

  explicit ScriptedPolicy(RewardSelector goal) : goal_(goal) {}

  ActionDist action_dist(const Level& level, const EnvState& state) const override;

 private:
  RewardSelector goal_;
  mutable std::mutex mutex_;
  mutable std::shared_ptr<const Plan> plan_;  // single-slot cache keyed by level digest
};

/// Convenience: a scripted policy planned for one specific level.
std::unique_ptr<Policy> scripted_policy(RewardSelector goal);

}  // namespace regretlab
