#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "regretlab/types.hpp"

namespace regretlab {

enum class EnvKind : uint8_t { Corner = 0, Dish = 1, Keys = 2 };

const char* env_kind_name(EnvKind kind);
EnvKind env_kind_from_name(const std::string& name);

/// Cheese maze. True goal: collect the cheese. Proxy goal: visit the
/// top-left interior corner (0,0) for the first time.
struct CornerLevel {
  WallGrid walls;
  Cell mouse_spawn;
  Cell cheese;
};

/// Cheese/dish maze. Reaching either object ends the episode; the true goal
/// rewards the cheese, the proxy goal rewards the dish. dish_channels is the
/// number of times the dish plane is replicated in the observation.
struct DishLevel {
  WallGrid walls;
  Cell mouse_spawn;
  Cell cheese;
  Cell dish;
  int dish_channels = 6;
};

/// Keys/chests maze. Keys are picked up into an inventory (cap 10); opening
/// a chest consumes a key and pays the true reward. The episode ends once
/// min(#keys, #chests) chests are open.
struct KeysLevel {
  WallGrid walls;
  Cell mouse_spawn;
  std::vector<Cell> keys;
  std::vector<Cell> chests;
};

inline constexpr int kMaxKeys = 10;
inline constexpr int kMaxChests = 10;

using Level = std::variant<CornerLevel, DishLevel, KeysLevel>;

EnvKind level_kind(const Level& level);
const WallGrid& level_walls(const Level& level);
Cell level_spawn(const Level& level);

/// Throws ValidationError unless positions are in-grid, off-wall, and
/// mutually distinct per the environment's rules.
void validate_level(const Level& level);

/// Stable 64-bit content hash (walls, positions, kind).
uint64_t level_digest(const Level& level);

// --- Level file format -----------------------------------------------------
//
//   # regretlab-levels v1
//   env=corner
//   <13 rows of '#' (wall) and '.' (free)>
//   mouse R C
//   cheese R C
//   [dish R C | key R C... chest R C...]
//
// Records are separated by blank lines. The version header is written by all
// our tools; readers accept a missing header but reject unknown versions.

std::string write_levels(std::span<const Level> levels);
void write_levels_file(const std::string& path, std::span<const Level> levels);
std::vector<Level> parse_levels(std::istream& in);
std::vector<Level> read_levels_file(const std::string& path);

}  // namespace regretlab
