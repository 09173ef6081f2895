#include <doctest.h>

#include <cmath>

#include "regretlab/levelgen.hpp"
#include "regretlab/solvers.hpp"

using namespace regretlab;

TEST_SUITE("levelgen") {

TEST_CASE("generation is a pure function of spec and seed") {
  for (EnvKind env : {EnvKind::Corner, EnvKind::Dish, EnvKind::Keys}) {
    GeneratorSpec spec;
    spec.env = env;
    spec.cls = LevelClass::Distinguishing;
    CHECK(level_digest(generate(spec, uint64_t{99})) ==
          level_digest(generate(spec, uint64_t{99})));
    CHECK(level_digest(generate(spec, uint64_t{99})) !=
          level_digest(generate(spec, uint64_t{100})));
  }
}

TEST_CASE("generated levels validate and honor the class conventions") {
  Rng rng(500);
  for (EnvKind env : {EnvKind::Corner, EnvKind::Dish, EnvKind::Keys}) {
    for (LevelClass cls : {LevelClass::NonDistinguishing, LevelClass::Distinguishing}) {
      GeneratorSpec spec;
      spec.env = env;
      spec.cls = cls;
      for (int i = 0; i < 200; ++i) {
        Level level = generate(spec, rng);
        validate_level(level);
        if (cls == LevelClass::NonDistinguishing) {
          // The non-distinguishing conventions are deterministic placements.
          CHECK(approx_distinguishing(level) == false);
          CHECK(classify(level).kind == ClassKind::NonDistinguishing);
        } else if (env == EnvKind::Keys) {
          CHECK(approx_distinguishing(level) == true);
        }
      }
    }
  }
}

TEST_CASE("the active square confines walls and placements") {
  Rng rng(501);
  GeneratorSpec spec;
  spec.env = EnvKind::Keys;
  spec.active_size = 6;
  spec.keys_count = 2;
  spec.chests_count = 2;
  for (int i = 0; i < 100; ++i) {
    Level level = generate(spec, rng);
    const auto& l = std::get<KeysLevel>(level);
    for (int r = 0; r < kGridSize; ++r)
      for (int c = 0; c < kGridSize; ++c)
        if (r >= 6 || c >= 6) CHECK(l.walls.at(r, c));
    CHECK(l.mouse_spawn.r < 6);
    CHECK(l.mouse_spawn.c < 6);
    for (Cell k : l.keys) CHECK((k.r < 6 && k.c < 6));
    for (Cell ch : l.chests) CHECK((ch.r < 6 && ch.c < 6));
  }
}

TEST_CASE("the corner region constrains distinguishing cheese placement") {
  Rng rng(502);
  GeneratorSpec spec;
  spec.cls = LevelClass::Distinguishing;
  spec.corner_region = 4;
  for (int i = 0; i < 200; ++i) {
    const auto& l = std::get<CornerLevel>(generate(spec, rng));
    CHECK(l.cheese.r < 4);
    CHECK(l.cheese.c < 4);
  }
}

TEST_CASE("wall density stays at the nominal rate despite retries") {
  Rng rng(503);
  GeneratorSpec spec;
  spec.cls = LevelClass::Distinguishing;
  int walls = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i)
    walls += std::get<CornerLevel>(generate(spec, rng)).walls.count();
  double fraction = static_cast<double>(walls) / (n * kGridCells);
  // Conditioning on placeability barely moves the marginal at p = 0.25.
  CHECK(std::abs(fraction - 0.25) < 0.01);
}

TEST_CASE("mixture sampling draws the distinguishing generator at rate alpha") {
  Rng rng(504);
  MixtureSpec mix;
  mix.alpha = 0.3;
  mix.d.cls = LevelClass::Distinguishing;
  int d_count = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    MixtureSample s = sample_mixture(mix, rng);
    if (s.distinguishing_label) ++d_count;
    // The non-distinguishing generator is positionally exact; the other
    // direction can land on the corner by chance, so only one side is firm.
    if (i < 200 && !s.distinguishing_label) CHECK(approx_distinguishing(s.level) == false);
  }
  CHECK(std::abs(static_cast<double>(d_count) / n - 0.3) < 0.005);
}

TEST_CASE("preserving edits keep objects and class fixed") {
  Rng rng(505);
  GeneratorSpec spec;
  spec.env = EnvKind::Dish;
  spec.cls = LevelClass::Distinguishing;
  for (int i = 0; i < 100; ++i) {
    Level level = generate(spec, rng);
    const auto& before = std::get<DishLevel>(level);
    Level edited = elementary_edit(level, EditKind::Preserving, 0.0, rng);
    const auto& after = std::get<DishLevel>(edited);
    validate_level(edited);
    CHECK(after.cheese == before.cheese);
    CHECK(after.dish == before.dish);
    CHECK(approx_distinguishing(edited) == approx_distinguishing(level));
  }
}

TEST_CASE("a zero-bias transform restores the corner placement") {
  Rng rng(506);
  GeneratorSpec spec;
  spec.cls = LevelClass::Distinguishing;
  for (int i = 0; i < 100; ++i) {
    Level level = generate(spec, rng);
    if (level_spawn(level) == Cell{0, 0}) continue;  // restore impossible there
    Level edited = elementary_edit(level, EditKind::BiasedTransforming, 0.0, rng);
    const auto& after = std::get<CornerLevel>(edited);
    CHECK(after.cheese == Cell{0, 0});
    CHECK(after.walls.at(0, 0) == false);
    validate_level(edited);
  }
}

TEST_CASE("a zero-bias transform collapses dish levels to non-distinguishing") {
  Rng rng(507);
  GeneratorSpec spec;
  spec.env = EnvKind::Dish;
  spec.cls = LevelClass::Distinguishing;
  for (int i = 0; i < 100; ++i) {
    Level edited =
        elementary_edit(generate(spec, rng), EditKind::BiasedTransforming, 0.0, rng);
    CHECK(approx_distinguishing(edited) == false);
  }
}

TEST_CASE("edit sequence variants transform when they should") {
  Rng rng(508);
  GeneratorSpec spec;
  spec.env = EnvKind::Dish;
  spec.cls = LevelClass::Distinguishing;

  EditSpec identity{EditSequenceVariant::Identity, 12, 0.0};
  EditSpec constant{EditSequenceVariant::Constant, 12, 0.0};
  for (int i = 0; i < 50; ++i) {
    Level level = generate(spec, rng);
    if (!approx_distinguishing(level)) continue;
    // Identity sequences never touch the objects; Constant always ends with
    // one transform, which at alpha = 0 de-distinguishes a dish level.
    CHECK(approx_distinguishing(apply_edit_sequence(level, identity, rng)) == true);
    CHECK(approx_distinguishing(apply_edit_sequence(level, constant, rng)) == false);
  }
}

TEST_CASE("binomial sequences transform each step with probability 1/n") {
  Rng rng(509);
  GeneratorSpec spec;
  spec.env = EnvKind::Dish;
  spec.cls = LevelClass::Distinguishing;
  EditSpec binomial{EditSequenceVariant::Binomial, 12, 0.0};
  int survived = 0, total = 0;
  while (total < 10000) {
    Level level = generate(spec, rng);
    if (!approx_distinguishing(level)) continue;
    ++total;
    if (approx_distinguishing(apply_edit_sequence(level, binomial, rng))) ++survived;
  }
  // Survival = no transform fired in n steps = (1 - 1/12)^12.
  double expected = std::pow(11.0 / 12.0, 12.0);
  CHECK(std::abs(static_cast<double>(survived) / total - expected) < 0.015);
}

TEST_CASE("spec validation rejects out-of-range parameters") {
  GeneratorSpec bad;
  bad.wall_probability = 1.5;
  CHECK_THROWS_AS(bad.validate(), ValidationError);

  bad = GeneratorSpec{};
  bad.active_size = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);

  bad = GeneratorSpec{};
  bad.keys_count = 3;  // missing the paired chest count
  CHECK_THROWS_AS(bad.validate(), ValidationError);

  bad = GeneratorSpec{};
  bad.keys_count = 11;
  bad.chests_count = 3;
  CHECK_THROWS_AS(bad.validate(), ValidationError);

  EditSpec edit;
  edit.n_edits = 0;
  CHECK_THROWS_AS(edit.validate(), ValidationError);
  edit = EditSpec{};
  edit.alpha = -0.1;
  CHECK_THROWS_AS(edit.validate(), ValidationError);

  MixtureSpec mix;
  mix.alpha = 2.0;
  CHECK_THROWS_AS(mix.validate(), ValidationError);
}

TEST_CASE("an impossible placement exhausts the retry budget loudly") {
  GeneratorSpec spec;
  spec.env = EnvKind::Keys;
  spec.active_size = 2;  // at most 4 cells can never host 13 objects + spawn
  Rng rng(510);
  CHECK_THROWS_AS(generate(spec, rng), CapacityError);
}

}  // TEST_SUITE
