#include "regretlab/levelgen.hpp"

#include <algorithm>
#include <vector>

namespace regretlab {

namespace {

constexpr int kPlacementRetries = 1000;
constexpr Cell kCornerCell{0, 0};

std::vector<Cell> free_cells(const WallGrid& walls, int active_size,
                             const std::vector<Cell>& exclude) {
  std::vector<Cell> out;
  for (int r = 0; r < active_size; ++r)
    for (int c = 0; c < active_size; ++c) {
      Cell p{static_cast<int8_t>(r), static_cast<int8_t>(c)};
      if (walls.at(p)) continue;
      if (std::find(exclude.begin(), exclude.end(), p) != exclude.end()) continue;
      out.push_back(p);
    }
  return out;
}

std::optional<Cell> pick_cell(const std::vector<Cell>& candidates, Rng& rng) {
  if (candidates.empty()) return std::nullopt;
  return candidates[rng.below(static_cast<uint32_t>(candidates.size()))];
}

struct KeyCounts {
  int keys;
  int chests;
};

KeyCounts key_counts(const GeneratorSpec& spec, LevelClass cls) {
  if (spec.keys_count && spec.chests_count) return {*spec.keys_count, *spec.chests_count};
  return cls == LevelClass::NonDistinguishing ? KeyCounts{3, 10} : KeyCounts{10, 3};
}

/// One full placement attempt; nullopt asks the caller to retry.
std::optional<Level> try_generate(const GeneratorSpec& spec, Rng& rng) {
  WallGrid walls;
  for (int r = 0; r < kGridSize; ++r)
    for (int c = 0; c < kGridSize; ++c) {
      bool outside = r >= spec.active_size || c >= spec.active_size;
      walls.set(r, c, outside || rng.bernoulli(spec.wall_probability));
    }

  auto spawn = pick_cell(free_cells(walls, spec.active_size, {}), rng);
  if (!spawn) return std::nullopt;

  switch (spec.env) {
    case EnvKind::Corner: {
      Cell cheese;
      if (spec.cls == LevelClass::NonDistinguishing) {
        if (walls.at(kCornerCell) || *spawn == kCornerCell) return std::nullopt;
        cheese = kCornerCell;
      } else {
        int region = std::min(spec.corner_region, spec.active_size);
        std::vector<Cell> in_region;
        for (Cell p : free_cells(walls, spec.active_size, {*spawn}))
          if (p.r < region && p.c < region) in_region.push_back(p);
        auto picked = pick_cell(in_region, rng);
        if (!picked) return std::nullopt;
        cheese = *picked;
      }
      return Level{CornerLevel{walls, *spawn, cheese}};
    }
    case EnvKind::Dish: {
      if (spec.cls == LevelClass::NonDistinguishing) {
        auto both = pick_cell(free_cells(walls, spec.active_size, {*spawn}), rng);
        if (!both) return std::nullopt;
        return Level{DishLevel{walls, *spawn, *both, *both, spec.dish_channels}};
      }
      auto candidates = free_cells(walls, spec.active_size, {*spawn});
      auto cheese = pick_cell(candidates, rng);
      auto dish = pick_cell(candidates, rng);  // independent; may coincide
      if (!cheese || !dish) return std::nullopt;
      return Level{DishLevel{walls, *spawn, *cheese, *dish, spec.dish_channels}};
    }
    case EnvKind::Keys: {
      KeyCounts counts = key_counts(spec, spec.cls);
      std::vector<Cell> pool = free_cells(walls, spec.active_size, {*spawn});
      if (static_cast<int>(pool.size()) < counts.keys + counts.chests) return std::nullopt;
      std::vector<Cell> keys, chests;
      for (int i = 0; i < counts.keys + counts.chests; ++i) {
        uint32_t j = rng.below(static_cast<uint32_t>(pool.size()));
        (i < counts.keys ? keys : chests).push_back(pool[j]);
        pool[j] = pool.back();
        pool.pop_back();
      }
      return Level{KeysLevel{walls, *spawn, std::move(keys), std::move(chests)}};
    }
  }
  throw ContractError("try_generate: bad env kind");
}

}  // namespace

void GeneratorSpec::validate() const {
  if (!(wall_probability >= 0.0 && wall_probability <= 1.0))
    throw ValidationError("GeneratorSpec: wall_probability must be in [0, 1]");
  if (active_size < 1 || active_size > kGridSize)
    throw ValidationError("GeneratorSpec: active_size must be in [1, 13]");
  if (corner_region < 1 || corner_region > kGridSize)
    throw ValidationError("GeneratorSpec: corner_region must be in [1, 13]");
  if (dish_channels < 1) throw ValidationError("GeneratorSpec: dish_channels must be >= 1");
  if (keys_count.has_value() != chests_count.has_value())
    throw ValidationError("GeneratorSpec: keys_count and chests_count come as a pair");
  if (keys_count) {
    if (*keys_count < 1 || *keys_count > kMaxKeys || *chests_count < 1 ||
        *chests_count > kMaxChests)
      throw ValidationError("GeneratorSpec: key/chest counts must be in [1, 10]");
  }
}

Level generate(const GeneratorSpec& spec, Rng& rng) {
  spec.validate();
  for (int attempt = 0; attempt < kPlacementRetries; ++attempt) {
    std::optional<Level> level = try_generate(spec, rng);
    if (level) {
      validate_level(*level);
      return std::move(*level);
    }
  }
  throw CapacityError("generate: placement retry budget exhausted");
}

Level generate(const GeneratorSpec& spec, uint64_t seed) {
  Rng rng(seed);
  return generate(spec, rng);
}

void MixtureSpec::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw ValidationError("MixtureSpec: alpha must be in [0, 1]");
  nd.validate();
  d.validate();
}

MixtureSample sample_mixture(const MixtureSpec& mix, Rng& rng) {
  mix.validate();
  bool pick_d = rng.bernoulli(mix.alpha);
  return MixtureSample{generate(pick_d ? mix.d : mix.nd, rng), pick_d};
}

// --- edits -------------------------------------------------------------------

namespace {

std::vector<Cell> object_cells(const Level& level) {
  std::vector<Cell> cells = {level_spawn(level)};
  if (const auto* l = std::get_if<CornerLevel>(&level)) {
    cells.push_back(l->cheese);
  } else if (const auto* l = std::get_if<DishLevel>(&level)) {
    cells.push_back(l->cheese);
    cells.push_back(l->dish);
  } else if (const auto* l = std::get_if<KeysLevel>(&level)) {
    cells.insert(cells.end(), l->keys.begin(), l->keys.end());
    cells.insert(cells.end(), l->chests.begin(), l->chests.end());
  }
  return cells;
}

void set_spawn(Level& level, Cell spawn) {
  std::visit([spawn](auto& l) { l.mouse_spawn = spawn; }, level);
}

/// Toggle a wall at a random cell that holds no object, or move the spawn to
/// a random free non-object cell. Never changes the level's classification.
Level preserving_edit(const Level& level, Rng& rng) {
  Level out = level;
  std::vector<Cell> objects = object_cells(level);
  int menu = level_kind(level) == EnvKind::Keys ? 4 : 2;
  switch (rng.below(menu)) {
    case 0: {  // toggle a wall
      std::vector<Cell> candidates;
      for (int r = 0; r < kGridSize; ++r)
        for (int c = 0; c < kGridSize; ++c) {
          Cell p{static_cast<int8_t>(r), static_cast<int8_t>(c)};
          if (std::find(objects.begin(), objects.end(), p) == objects.end())
            candidates.push_back(p);
        }
      if (auto p = pick_cell(candidates, rng)) {
        WallGrid walls = level_walls(level);
        walls.set(*p, !walls.at(*p));
        std::visit([&walls](auto& l) { l.walls = walls; }, out);
      }
      break;
    }
    case 1: {  // move the spawn
      std::vector<Cell> candidates = free_cells(level_walls(level), kGridSize, objects);
      if (auto p = pick_cell(candidates, rng)) set_spawn(out, *p);
      break;
    }
    case 2: {  // move one key
      auto& l = std::get<KeysLevel>(out);
      uint32_t i = rng.below(static_cast<uint32_t>(l.keys.size()));
      std::vector<Cell> candidates = free_cells(level_walls(level), kGridSize, objects);
      if (auto p = pick_cell(candidates, rng)) l.keys[i] = *p;
      break;
    }
    case 3: {  // move one chest
      auto& l = std::get<KeysLevel>(out);
      uint32_t i = rng.below(static_cast<uint32_t>(l.chests.size()));
      std::vector<Cell> candidates = free_cells(level_walls(level), kGridSize, objects);
      if (auto p = pick_cell(candidates, rng)) l.chests[i] = *p;
      break;
    }
  }
  return out;
}

/// Re-place the class-defining objects; lands distinguishing w.p. alpha.
/// `unrestricted` drops the bias in favor of fully random placement.
Level transforming_edit(const Level& level, double alpha, bool unrestricted, Rng& rng) {
  Level out = level;
  const WallGrid& walls = level_walls(level);
  Cell spawn = level_spawn(level);
  if (auto* l = std::get_if<CornerLevel>(&out)) {
    bool randomize = unrestricted || rng.bernoulli(alpha);
    // Restoring the corner placement needs the corner cell available; when
    // the spawn sits there we can only randomize.
    if (!randomize && spawn == kCornerCell) randomize = true;
    if (randomize) {
      if (auto p = pick_cell(free_cells(walls, kGridSize, {spawn}), rng)) l->cheese = *p;
    } else {
      if (walls.at(kCornerCell)) l->walls.set(kCornerCell, false);
      l->cheese = kCornerCell;
    }
  } else if (auto* l = std::get_if<DishLevel>(&out)) {
    auto candidates = free_cells(walls, kGridSize, {spawn});
    if (unrestricted) {
      auto cheese = pick_cell(candidates, rng);
      auto dish = pick_cell(candidates, rng);
      if (cheese && dish) {
        l->cheese = *cheese;
        l->dish = *dish;
      }
    } else {
      auto dish = pick_cell(candidates, rng);
      if (dish) {
        l->dish = *dish;
        if (rng.bernoulli(alpha)) {
          if (auto cheese = pick_cell(candidates, rng)) l->cheese = *cheese;
        } else {
          l->cheese = *dish;
        }
      }
    }
  } else if (auto* l = std::get_if<KeysLevel>(&out)) {
    double p_distinguishing = unrestricted ? 0.5 : alpha;
    KeyCounts counts = rng.bernoulli(p_distinguishing) ? KeyCounts{10, 3} : KeyCounts{3, 10};
    std::vector<Cell> pool = free_cells(walls, kGridSize, {spawn});
    if (static_cast<int>(pool.size()) >= counts.keys + counts.chests) {
      l->keys.clear();
      l->chests.clear();
      for (int i = 0; i < counts.keys + counts.chests; ++i) {
        uint32_t j = rng.below(static_cast<uint32_t>(pool.size()));
        (i < counts.keys ? l->keys : l->chests).push_back(pool[j]);
        pool[j] = pool.back();
        pool.pop_back();
      }
    }
  }
  return out;
}

}  // namespace

Level elementary_edit(const Level& level, EditKind kind, double alpha, Rng& rng) {
  validate_level(level);
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw ValidationError("elementary_edit: alpha must be in [0, 1]");
  Level out;
  switch (kind) {
    case EditKind::Preserving: out = preserving_edit(level, rng); break;
    case EditKind::BiasedTransforming: out = transforming_edit(level, alpha, false, rng); break;
    case EditKind::UnrestrictedTransforming:
      out = transforming_edit(level, alpha, true, rng);
      break;
    default: throw ContractError("elementary_edit: bad kind");
  }
  validate_level(out);
  return out;
}

void EditSpec::validate() const {
  if (n_edits < 1) throw ValidationError("EditSpec: n_edits must be >= 1");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw ValidationError("EditSpec: alpha must be in [0, 1]");
}

Level apply_edit_sequence(const Level& level, const EditSpec& spec, Rng& rng) {
  spec.validate();
  Level out = level;
  switch (spec.variant) {
    case EditSequenceVariant::Identity:
      for (int i = 0; i < spec.n_edits; ++i)
        out = elementary_edit(out, EditKind::Preserving, spec.alpha, rng);
      break;
    case EditSequenceVariant::Constant:
      for (int i = 0; i < spec.n_edits - 1; ++i)
        out = elementary_edit(out, EditKind::Preserving, spec.alpha, rng);
      out = elementary_edit(out, EditKind::BiasedTransforming, spec.alpha, rng);
      break;
    case EditSequenceVariant::Binomial:
      for (int i = 0; i < spec.n_edits; ++i) {
        bool transform = rng.bernoulli(1.0 / spec.n_edits);
        out = elementary_edit(
            out, transform ? EditKind::BiasedTransforming : EditKind::Preserving, spec.alpha,
            rng);
      }
      break;
    case EditSequenceVariant::Unrestricted:
      for (int i = 0; i < spec.n_edits - 1; ++i)
        out = elementary_edit(out, EditKind::Preserving, spec.alpha, rng);
      out = elementary_edit(out, EditKind::UnrestrictedTransforming, spec.alpha, rng);
      break;
    default: throw ContractError("apply_edit_sequence: bad variant");
  }
  return out;
}

}  // namespace regretlab
