#pragma once

#include <cstdint>
#include <optional>

#include "regretlab/level.hpp"
#include "regretlab/rng.hpp"

namespace regretlab {

enum class LevelClass : uint8_t { NonDistinguishing = 0, Distinguishing = 1 };

/// Procedural generator parameters. Placement order is walls, then spawn,
/// then objects, each rejection-sampled; a whole-level retry fires when a
/// placement is impossible (e.g. the corner got walled before the cheese
/// landed there), which leaves the conditional wall distribution unchanged.
struct GeneratorSpec {
  EnvKind env = EnvKind::Corner;
  LevelClass cls = LevelClass::NonDistinguishing;
  double wall_probability = 0.25;
  /// Cells outside the top-left active_size x active_size square are forced
  /// walls and nothing is placed there. 13 means the full grid; small values
  /// give the reduced mazes used by the desk-scale learner experiments.
  int active_size = kGridSize;
  /// Distinguishing corner levels place the cheese within the top-left
  /// corner_region x corner_region square (13 = anywhere).
  int corner_region = kGridSize;
  int dish_channels = 6;
  /// Key/chest counts; when unset they follow the class convention of
  /// (3, 10) for non-distinguishing and (10, 3) for distinguishing levels.
  std::optional<int> keys_count;
  std::optional<int> chests_count;

  void validate() const;
};

Level generate(const GeneratorSpec& spec, Rng& rng);
Level generate(const GeneratorSpec& spec, uint64_t seed);

/// alpha-mixture of a distinguishing and a non-distinguishing generator.
struct MixtureSpec {
  double alpha = 0.0;  // probability of drawing from the distinguishing generator
  GeneratorSpec nd;
  GeneratorSpec d;

  void validate() const;
};

struct MixtureSample {
  Level level;
  bool distinguishing_label = false;  // which generator produced it
};

MixtureSample sample_mixture(const MixtureSpec& mix, Rng& rng);

// --- Elementary edits and edit sequences -------------------------------------

enum class EditKind : uint8_t {
  Preserving = 0,             // keeps the level's class: wall toggles, spawn
                              // moves, and (keys) single-object moves
  BiasedTransforming = 1,     // re-places the class-defining objects, landing
                              // distinguishing with probability alpha
  UnrestrictedTransforming = 2
};

Level elementary_edit(const Level& level, EditKind kind, double alpha, Rng& rng);

enum class EditSequenceVariant : uint8_t {
  Identity = 0,      // n preserving edits
  Constant = 1,      // n-1 preserving, then one biased transform
  Binomial = 2,      // n edits, each biased with probability 1/n
  Unrestricted = 3,  // n-1 preserving, then one unrestricted transform
};

struct EditSpec {
  EditSequenceVariant variant = EditSequenceVariant::Identity;
  int n_edits = 12;
  double alpha = 0.0;

  void validate() const;
};

Level apply_edit_sequence(const Level& level, const EditSpec& spec, Rng& rng);

}  // namespace regretlab
