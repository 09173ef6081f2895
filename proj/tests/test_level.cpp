#include <doctest.h>

#include <sstream>

#include "regretlab/errors.hpp"
#include "regretlab/level.hpp"
#include "regretlab/levelgen.hpp"

using namespace regretlab;

namespace {

CornerLevel simple_corner() {
  CornerLevel level;
  level.walls.set(4, 4, true);
  level.walls.set(0, 5, true);
  level.mouse_spawn = {6, 6};
  level.cheese = {2, 9};
  return level;
}

KeysLevel simple_keys() {
  KeysLevel level;
  level.walls.set(1, 1, true);
  level.mouse_spawn = {0, 0};
  level.keys = {{2, 2}, {3, 3}, {4, 4}};
  level.chests = {{5, 5}, {6, 6}};
  return level;
}

}  // namespace

TEST_SUITE("level") {

TEST_CASE("write/parse round-trips all environment kinds") {
  DishLevel dish;
  dish.mouse_spawn = {1, 1};
  dish.cheese = {2, 3};
  dish.dish = {10, 10};
  dish.walls.set(7, 7, true);

  std::vector<Level> levels = {Level{simple_corner()}, Level{dish}, Level{simple_keys()}};
  std::string text = write_levels(levels);
  std::istringstream in(text);
  std::vector<Level> back = parse_levels(in);
  REQUIRE(back.size() == levels.size());
  for (size_t i = 0; i < levels.size(); ++i) {
    CHECK(level_digest(back[i]) == level_digest(levels[i]));
  }
}

TEST_CASE("digest is content-sensitive") {
  CornerLevel a = simple_corner();
  CornerLevel b = a;
  CHECK(level_digest(Level{a}) == level_digest(Level{b}));
  b.walls.set(12, 12, true);
  CHECK(level_digest(Level{a}) != level_digest(Level{b}));
  CornerLevel c = a;
  c.cheese = {2, 10};
  CHECK(level_digest(Level{a}) != level_digest(Level{c}));
}

TEST_CASE("digest distinguishes kinds with identical geometry") {
  CornerLevel corner = simple_corner();
  DishLevel dish;
  dish.walls = corner.walls;
  dish.mouse_spawn = corner.mouse_spawn;
  dish.cheese = corner.cheese;
  dish.dish = corner.cheese;
  CHECK(level_digest(Level{corner}) != level_digest(Level{dish}));
}

TEST_CASE("validation rejects objects on walls") {
  CornerLevel level = simple_corner();
  level.walls.set(level.cheese, true);
  CHECK_THROWS_AS(validate_level(Level{level}), ValidationError);

  KeysLevel keys = simple_keys();
  keys.walls.set(keys.keys[0], true);
  CHECK_THROWS_AS(validate_level(Level{keys}), ValidationError);
}

TEST_CASE("validation rejects a walled-in spawn cell") {
  CornerLevel level = simple_corner();
  level.walls.set(level.mouse_spawn, true);
  CHECK_THROWS_AS(validate_level(Level{level}), ValidationError);
}

TEST_CASE("validation rejects duplicate key cells") {
  KeysLevel keys = simple_keys();
  keys.keys[1] = keys.keys[0];
  CHECK_THROWS_AS(validate_level(Level{keys}), ValidationError);
}

TEST_CASE("parser rejects an unknown format version") {
  std::string text = write_levels({{Level{simple_corner()}}});
  std::string bumped = text;
  bumped.replace(bumped.find("v1"), 2, "v9");
  std::istringstream in(bumped);
  CHECK_THROWS_AS(parse_levels(in), ValidationError);
}

TEST_CASE("parser accepts input without a version header") {
  std::string text = write_levels({{Level{simple_corner()}}});
  std::string headerless = text.substr(text.find('\n') + 1);
  std::istringstream in(headerless);
  CHECK(parse_levels(in).size() == 1);
}

TEST_CASE("parser rejects malformed grids") {
  std::istringstream in("env=corner\n..\nmouse 0 0\ncheese 1 1\n");
  CHECK_THROWS_AS(parse_levels(in), ValidationError);
}

TEST_CASE("file round-trip preserves generated levels") {
  GeneratorSpec spec;
  spec.env = EnvKind::Keys;
  Rng rng(5);
  std::vector<Level> levels;
  for (int i = 0; i < 8; ++i) levels.push_back(generate(spec, rng));
  std::string path = "/tmp/regretlab_test_levels.txt";
  write_levels_file(path, levels);
  std::vector<Level> back = read_levels_file(path);
  REQUIRE(back.size() == levels.size());
  for (size_t i = 0; i < levels.size(); ++i) {
    CHECK(level_digest(back[i]) == level_digest(levels[i]));
  }
}

}  // TEST_SUITE
