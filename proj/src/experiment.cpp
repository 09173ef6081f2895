#include "regretlab/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "regretlab/errors.hpp"

namespace regretlab {

namespace {

using nlohmann::json;

uint64_t stream_seed(const RunConfig& config, SeedStream stream) {
  return Rng(config.seed).split(static_cast<uint64_t>(stream)).state();
}

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string hex_u64(uint64_t value) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace

EvalSets build_eval_sets(const RunConfig& config, uint64_t seed) {
  MixtureSpec mix = config.mixture();
  Rng root(seed);
  auto fill = [&](const GeneratorSpec& gen, ClassKind want, uint64_t stream,
                  std::vector<Level>& out) {
    Rng rng = root.split(stream);
    int attempts = 0;
    const int cap = config.eval.n_levels * 1000;
    while (static_cast<int>(out.size()) < config.eval.n_levels) {
      if (++attempts > cap) {
        throw CapacityError("eval set generation exhausted its attempt budget");
      }
      Level level = generate(gen, rng);
      Classification cls = classify(level);
      if (!cls.goal_reachable || cls.kind != want) continue;
      out.push_back(std::move(level));
    }
  };
  EvalSets sets;
  fill(mix.d, ClassKind::Distinguishing, 0, sets.distinguishing);
  fill(mix.nd, ClassKind::NonDistinguishing, 1, sets.plain);
  return sets;
}

RunArtifacts run_experiment(const RunConfig& config) {
  config.validate();
  std::filesystem::create_directories(config.output_dir);

  std::unique_ptr<Learner> learner =
      make_learner(config.learner, stream_seed(config, SeedStream::Learner));
  EvalSets sets = build_eval_sets(config, stream_seed(config, SeedStream::EvalLevels));
  MixtureSpec mixture = config.mixture();
  TrainState state(config.adversary.buffer_capacity, stream_seed(config, SeedStream::Train));
  Rng eval_rng(stream_seed(config, SeedStream::EvalRollouts));

  double eval_distinguishing = 0.0, eval_plain = 0.0, eval_proxy = 0.0;
  auto run_eval = [&](int64_t iteration) {
    EvalProtocol true_protocol = config.eval.protocol;
    true_protocol.reward = RewardSelector::True;
    EvalProtocol proxy_protocol = true_protocol;
    proxy_protocol.reward = RewardSelector::Proxy;
    const Policy& policy = learner->eval_policy();
    Rng at = eval_rng.split(static_cast<uint64_t>(iteration));
    eval_distinguishing =
        evaluate(policy, sets.distinguishing, true_protocol, config.discount, at.split(0).state())
            .mean;
    eval_plain =
        evaluate(policy, sets.plain, true_protocol, config.discount, at.split(1).state()).mean;
    eval_proxy =
        evaluate(policy, sets.distinguishing, proxy_protocol, config.discount, at.split(2).state())
            .mean;
  };
  run_eval(0);

  std::vector<MetricsRow> rows;
  rows.reserve(static_cast<size_t>(config.train.steps));
  for (int64_t t = 1; t <= config.train.steps; ++t) {
    ued_step(state, *learner, mixture, config.adversary, config.discount);
    if (t % config.train.eval_every == 0 || t == config.train.steps) run_eval(t);
    MetricsRow row;
    row.iteration = state.counters.iteration;
    row.env_steps = state.counters.env_steps;
    row.trained_fraction_distinguishing =
        state.counters.trained_levels > 0
            ? static_cast<double>(state.counters.trained_distinguishing) /
                  static_cast<double>(state.counters.trained_levels)
            : 0.0;
    row.buffer_fraction_distinguishing = state.buffer.fraction_distinguishing();
    row.buffer_fraction_unsolvable = state.buffer.fraction_unsolvable();
    row.mean_eval_return_distinguishing = eval_distinguishing;
    row.mean_eval_return_nondistinguishing = eval_plain;
    row.mean_eval_proxy_return = eval_proxy;
    rows.push_back(row);
  }

  RunArtifacts artifacts;
  std::filesystem::path dir(config.output_dir);
  artifacts.metrics_path = (dir / "metrics.csv").string();
  artifacts.snapshot_path = (dir / "snapshot.txt").string();
  artifacts.manifest_path = (dir / "manifest.json").string();
  artifacts.rows = std::move(rows);

  {
    std::ofstream out(artifacts.metrics_path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + artifacts.metrics_path);
    write_metrics_csv(out, artifacts.rows);
  }
  save_learner_file(*learner, artifacts.snapshot_path);

  json manifest;
  manifest["format_version"] = kConfigFormatVersion;
  manifest["config"] = json::parse(serialize_run_config(config));
  manifest["config_digest"] = hex_u64(config_digest(config));
  manifest["seed_streams"] = {{"train", static_cast<uint64_t>(SeedStream::Train)},
                              {"eval_levels", static_cast<uint64_t>(SeedStream::EvalLevels)},
                              {"eval_rollouts", static_cast<uint64_t>(SeedStream::EvalRollouts)},
                              {"learner", static_cast<uint64_t>(SeedStream::Learner)}};
  manifest["artifacts"] = {{"metrics", "metrics.csv"}, {"snapshot", "snapshot.txt"}};
  {
    std::ofstream out(artifacts.manifest_path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + artifacts.manifest_path);
    out << manifest.dump(2) << "\n";
  }
  return artifacts;
}

bool replay_run(const std::string& manifest_path, const std::string& replay_dir) {
  json manifest;
  try {
    manifest = json::parse(read_file_bytes(manifest_path));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("manifest: not valid JSON: ") + e.what());
  }
  if (!manifest.contains("format_version") ||
      !manifest.at("format_version").is_number_integer() ||
      manifest.at("format_version").get<int>() != kConfigFormatVersion) {
    throw ValidationError("manifest: unsupported format_version");
  }
  if (!manifest.contains("config")) throw ValidationError("manifest: missing config");
  RunConfig config = parse_run_config(manifest.at("config").dump());

  uint64_t recorded = 0;
  if (std::sscanf(manifest.value("config_digest", std::string()).c_str(), "0x%llx",
                  reinterpret_cast<unsigned long long*>(&recorded)) == 1 &&
      recorded != config_digest(config)) {
    throw ValidationError("manifest: config digest mismatch");
  }

  std::filesystem::path original_dir = std::filesystem::path(manifest_path).parent_path();
  std::string metrics_name = manifest.value("/artifacts/metrics"_json_pointer, "metrics.csv");
  std::string snapshot_name = manifest.value("/artifacts/snapshot"_json_pointer, "snapshot.txt");

  config.output_dir = replay_dir;
  RunArtifacts replayed = run_experiment(config);

  return read_file_bytes((original_dir / metrics_name).string()) ==
             read_file_bytes(replayed.metrics_path) &&
         read_file_bytes((original_dir / snapshot_name).string()) ==
             read_file_bytes(replayed.snapshot_path);
}

// --- cheese-position heatmap ------------------------------------------------------

int HeatmapGrid::masked_count() const {
  int n = 0;
  for (char m : masked) n += m != 0;
  return n;
}

HeatmapGrid emit_heatmap(const Policy& policy, const CornerLevel& base,
                         const EvalProtocol& protocol, const DiscountSpec& discount,
                         uint64_t seed) {
  protocol.validate();
  discount.validate();
  HeatmapGrid grid;
  grid.walls = base.walls;
  grid.spawn = base.mouse_spawn;
  grid.values.assign(kGridCells, 0.0);
  grid.masked.assign(kGridCells, 0);
  Rng root(seed);
  for (int i = 0; i < kGridCells; ++i) {
    Cell cell = cell_from_index(i);
    if (base.walls.at(cell) || cell == base.mouse_spawn) {
      grid.masked[i] = 1;
      continue;
    }
    CornerLevel variant = base;
    variant.cheese = cell;
    Level level{variant};
    validate_level(level);
    std::vector<Level> batch{level};
    grid.values[i] = evaluate(policy, batch, protocol, discount, root.split(i).state()).mean;
  }
  return grid;
}

void write_heatmap_json(std::ostream& out, const HeatmapGrid& grid) {
  json doc;
  doc["format_version"] = kConfigFormatVersion;
  doc["env"] = "corner";
  std::vector<std::string> walls;
  for (int r = 0; r < kGridSize; ++r) {
    std::string row(kGridSize, '.');
    for (int c = 0; c < kGridSize; ++c) {
      if (grid.walls.at(r, c)) row[c] = '#';
    }
    walls.push_back(std::move(row));
  }
  doc["walls"] = walls;
  doc["spawn"] = {grid.spawn.r, grid.spawn.c};
  json values = json::array();
  for (int r = 0; r < kGridSize; ++r) {
    json row = json::array();
    for (int c = 0; c < kGridSize; ++c) {
      int i = r * kGridSize + c;
      if (grid.masked[i]) {
        row.push_back(nullptr);
      } else {
        row.push_back(grid.values[i]);
      }
    }
    values.push_back(std::move(row));
  }
  doc["values"] = std::move(values);
  out << doc.dump(2) << "\n";
}

HeatmapGrid read_heatmap_json(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("heatmap: not valid JSON: ") + e.what());
  }
  if (!doc.contains("format_version") || !doc.at("format_version").is_number_integer() ||
      doc.at("format_version").get<int>() != kConfigFormatVersion) {
    throw ValidationError("heatmap: unsupported format_version");
  }
  HeatmapGrid grid;
  grid.values.assign(kGridCells, 0.0);
  grid.masked.assign(kGridCells, 0);
  const auto& walls = doc.at("walls");
  if (!walls.is_array() || walls.size() != kGridSize) {
    throw ValidationError("heatmap: walls must have one row per grid row");
  }
  for (int r = 0; r < kGridSize; ++r) {
    std::string row = walls.at(r).get<std::string>();
    if (row.size() != kGridSize) throw ValidationError("heatmap: bad wall row length");
    for (int c = 0; c < kGridSize; ++c) grid.walls.set(r, c, row[c] == '#');
  }
  grid.spawn = Cell{static_cast<int8_t>(doc.at("spawn").at(0).get<int>()),
                    static_cast<int8_t>(doc.at("spawn").at(1).get<int>())};
  const auto& values = doc.at("values");
  if (!values.is_array() || values.size() != kGridSize) {
    throw ValidationError("heatmap: values must have one row per grid row");
  }
  for (int r = 0; r < kGridSize; ++r) {
    const auto& row = values.at(r);
    if (!row.is_array() || row.size() != kGridSize) {
      throw ValidationError("heatmap: bad value row length");
    }
    for (int c = 0; c < kGridSize; ++c) {
      int i = r * kGridSize + c;
      if (row.at(c).is_null()) {
        grid.masked[i] = 1;
      } else {
        grid.values[i] = row.at(c).get<double>();
      }
    }
  }
  return grid;
}

}  // namespace regretlab
