#include "regretlab/level.hpp"

#include <fstream>
#include <istream>
#include <sstream>

#include "regretlab/rng.hpp"

namespace regretlab {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

void check_free_cell(const WallGrid& walls, Cell p, const char* name) {
  require(in_grid(p.r, p.c), std::string(name) + " out of grid");
  require(!walls.at(p), std::string(name) + " placed on a wall");
}

}  // namespace

const char* env_kind_name(EnvKind kind) {
  switch (kind) {
    case EnvKind::Corner: return "corner";
    case EnvKind::Dish: return "dish";
    case EnvKind::Keys: return "keys";
  }
  throw ContractError("env_kind_name: bad kind");
}

EnvKind env_kind_from_name(const std::string& name) {
  if (name == "corner") return EnvKind::Corner;
  if (name == "dish") return EnvKind::Dish;
  if (name == "keys") return EnvKind::Keys;
  throw ValidationError("unknown environment kind: " + name);
}

EnvKind level_kind(const Level& level) {
  return static_cast<EnvKind>(level.index());
}

const WallGrid& level_walls(const Level& level) {
  return std::visit([](const auto& l) -> const WallGrid& { return l.walls; }, level);
}

Cell level_spawn(const Level& level) {
  return std::visit([](const auto& l) { return l.mouse_spawn; }, level);
}

void validate_level(const Level& level) {
  const WallGrid& walls = level_walls(level);
  check_free_cell(walls, level_spawn(level), "mouse spawn");
  if (const auto* l = std::get_if<CornerLevel>(&level)) {
    check_free_cell(walls, l->cheese, "cheese");
    require(!(l->cheese == l->mouse_spawn), "cheese placed on the mouse spawn");
  } else if (const auto* l = std::get_if<DishLevel>(&level)) {
    check_free_cell(walls, l->cheese, "cheese");
    check_free_cell(walls, l->dish, "dish");
    require(!(l->cheese == l->mouse_spawn), "cheese placed on the mouse spawn");
    require(!(l->dish == l->mouse_spawn), "dish placed on the mouse spawn");
    require(l->dish_channels >= 1, "dish_channels must be >= 1");
  } else if (const auto* l = std::get_if<KeysLevel>(&level)) {
    require(!l->keys.empty() && static_cast<int>(l->keys.size()) <= kMaxKeys,
            "key count must be in [1, 10]");
    require(!l->chests.empty() && static_cast<int>(l->chests.size()) <= kMaxChests,
            "chest count must be in [1, 10]");
    std::vector<Cell> all = {l->mouse_spawn};
    for (Cell k : l->keys) {
      check_free_cell(walls, k, "key");
      all.push_back(k);
    }
    for (Cell ch : l->chests) {
      check_free_cell(walls, ch, "chest");
      all.push_back(ch);
    }
    for (size_t i = 0; i < all.size(); ++i)
      for (size_t j = i + 1; j < all.size(); ++j)
        require(!(all[i] == all[j]), "keys env requires spawn/keys/chests on distinct cells");
  }
}

uint64_t level_digest(const Level& level) {
  uint64_t h = mix64(0x6c76656c, static_cast<uint64_t>(level.index()));
  const WallGrid& walls = level_walls(level);
  for (uint16_t row : walls.rows) h = mix64(h, row);
  auto fold_cell = [&h](Cell p) { h = mix64(h, (static_cast<uint64_t>(p.r) << 8) | p.c); };
  fold_cell(level_spawn(level));
  if (const auto* l = std::get_if<CornerLevel>(&level)) {
    fold_cell(l->cheese);
  } else if (const auto* l = std::get_if<DishLevel>(&level)) {
    fold_cell(l->cheese);
    fold_cell(l->dish);
    h = mix64(h, static_cast<uint64_t>(l->dish_channels));
  } else if (const auto* l = std::get_if<KeysLevel>(&level)) {
    h = mix64(h, l->keys.size());
    for (Cell k : l->keys) fold_cell(k);
    h = mix64(h, l->chests.size());
    for (Cell ch : l->chests) fold_cell(ch);
  }
  return h;
}

// --- file format -------------------------------------------------------------

namespace {

constexpr const char* kLevelsHeader = "# regretlab-levels v1";

void write_one(std::ostream& out, const Level& level) {
  out << "env=" << env_kind_name(level_kind(level)) << "\n";
  const WallGrid& walls = level_walls(level);
  for (int r = 0; r < kGridSize; ++r) {
    for (int c = 0; c < kGridSize; ++c) out << (walls.at(r, c) ? '#' : '.');
    out << "\n";
  }
  Cell spawn = level_spawn(level);
  out << "mouse " << int(spawn.r) << " " << int(spawn.c) << "\n";
  if (const auto* l = std::get_if<CornerLevel>(&level)) {
    out << "cheese " << int(l->cheese.r) << " " << int(l->cheese.c) << "\n";
  } else if (const auto* l = std::get_if<DishLevel>(&level)) {
    out << "cheese " << int(l->cheese.r) << " " << int(l->cheese.c) << "\n";
    out << "dish " << int(l->dish.r) << " " << int(l->dish.c) << "\n";
  } else if (const auto* l = std::get_if<KeysLevel>(&level)) {
    for (Cell k : l->keys) out << "key " << int(k.r) << " " << int(k.c) << "\n";
    for (Cell ch : l->chests) out << "chest " << int(ch.r) << " " << int(ch.c) << "\n";
  }
}

struct RecordLines {
  std::vector<std::string> lines;
  int first_line_no = 0;
};

Level parse_record(const RecordLines& rec) {
  const auto& lines = rec.lines;
  auto fail = [&rec](const std::string& msg) -> void {
    throw ValidationError("levels file, record starting at line " +
                          std::to_string(rec.first_line_no) + ": " + msg);
  };
  size_t i = 0;
  if (lines.empty()) fail("empty record");
  if (lines[i].rfind("env=", 0) != 0) fail("expected env=<kind> header");
  EnvKind kind = env_kind_from_name(lines[i].substr(4));
  ++i;
  if (lines.size() < i + kGridSize) fail("expected 13 maze rows");
  WallGrid walls;
  for (int r = 0; r < kGridSize; ++r, ++i) {
    const std::string& row = lines[i];
    if (static_cast<int>(row.size()) != kGridSize) fail("maze row must have 13 cells");
    for (int c = 0; c < kGridSize; ++c) {
      if (row[c] == '#')
        walls.set(r, c, true);
      else if (row[c] != '.')
        fail("maze rows may contain only '#' and '.'");
    }
  }

  Cell spawn{};
  bool have_spawn = false;
  Cell cheese{}, dish{};
  bool have_cheese = false, have_dish = false;
  std::vector<Cell> keys, chests;
  for (; i < lines.size(); ++i) {
    std::istringstream ls(lines[i]);
    std::string tag;
    int r = -1, c = -1;
    ls >> tag >> r >> c;
    if (ls.fail() || !in_grid(r, c)) fail("bad position line: " + lines[i]);
    Cell p{static_cast<int8_t>(r), static_cast<int8_t>(c)};
    if (tag == "mouse") {
      if (have_spawn) fail("duplicate mouse line");
      spawn = p;
      have_spawn = true;
    } else if (tag == "cheese") {
      if (have_cheese) fail("duplicate cheese line");
      cheese = p;
      have_cheese = true;
    } else if (tag == "dish") {
      if (have_dish) fail("duplicate dish line");
      dish = p;
      have_dish = true;
    } else if (tag == "key") {
      keys.push_back(p);
    } else if (tag == "chest") {
      chests.push_back(p);
    } else {
      fail("unknown position tag: " + tag);
    }
  }
  if (!have_spawn) fail("missing mouse line");

  Level level;
  switch (kind) {
    case EnvKind::Corner:
      if (!have_cheese) fail("corner record needs a cheese line");
      if (have_dish || !keys.empty() || !chests.empty()) fail("unexpected objects in corner record");
      level = CornerLevel{walls, spawn, cheese};
      break;
    case EnvKind::Dish:
      if (!have_cheese || !have_dish) fail("dish record needs cheese and dish lines");
      if (!keys.empty() || !chests.empty()) fail("unexpected objects in dish record");
      level = DishLevel{walls, spawn, cheese, dish};
      break;
    case EnvKind::Keys:
      if (have_cheese || have_dish) fail("unexpected objects in keys record");
      level = KeysLevel{walls, spawn, std::move(keys), std::move(chests)};
      break;
  }
  validate_level(level);
  return level;
}

}  // namespace

std::string write_levels(std::span<const Level> levels) {
  std::ostringstream out;
  out << kLevelsHeader << "\n";
  for (size_t i = 0; i < levels.size(); ++i) {
    if (i) out << "\n";
    write_one(out, levels[i]);
  }
  return out.str();
}

void write_levels_file(const std::string& path, std::span<const Level> levels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  out << write_levels(levels);
}

std::vector<Level> parse_levels(std::istream& in) {
  std::vector<RecordLines> records;
  RecordLines current;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("# regretlab-levels", 0) == 0) {
      if (line != kLevelsHeader)
        throw ValidationError("unsupported levels file version: " + line);
      continue;
    }
    if (!line.empty() && line[0] == '#' && line.find('=') == std::string::npos &&
        current.lines.empty()) {
      // Comment line outside a record (maze rows start inside a record).
      continue;
    }
    if (line.empty()) {
      if (!current.lines.empty()) {
        records.push_back(std::move(current));
        current = {};
      }
      continue;
    }
    if (current.lines.empty()) current.first_line_no = line_no;
    current.lines.push_back(line);
  }
  if (!current.lines.empty()) records.push_back(std::move(current));

  std::vector<Level> levels;
  levels.reserve(records.size());
  for (const auto& rec : records) levels.push_back(parse_record(rec));
  return levels;
}

std::vector<Level> read_levels_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open levels file: " + path);
  return parse_levels(in);
}

}  // namespace regretlab
