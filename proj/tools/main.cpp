#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "regretlab/experiment.hpp"
#include "regretlab/theory.hpp"

using namespace regretlab;
using nlohmann::json;

namespace {

std::string hex_u64(uint64_t value) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(value));
  return buf;
}

/// Named reference policies plus learner snapshots: "scripted-true",
/// "scripted-proxy", "uniform", or a snapshot file path.
struct PolicyHandle {
  std::unique_ptr<Policy> owned;
  std::unique_ptr<Learner> learner;

  const Policy& get() const { return learner ? learner->eval_policy() : *owned; }
};

PolicyHandle resolve_policy(const std::string& spec) {
  PolicyHandle handle;
  if (spec == "scripted-true") {
    handle.owned = scripted_policy(RewardSelector::True);
  } else if (spec == "scripted-proxy") {
    handle.owned = scripted_policy(RewardSelector::Proxy);
  } else if (spec == "uniform") {
    handle.owned = std::make_unique<UniformPolicy>();
  } else {
    handle.learner = load_learner_file(spec);
  }
  return handle;
}

void apply_output_dir_override(RunConfig& config) {
  if (const char* dir = std::getenv("REGRETLAB_OUTPUT_DIR")) {
    if (*dir) config.output_dir = dir;
  }
}

int cmd_gen(const std::string& env_name, const std::string& cls_name, int count, uint64_t seed,
            double wall_probability, int active_size, int corner_region,
            const std::string& out_path) {
  GeneratorSpec spec;
  spec.env = env_kind_from_name(env_name);
  if (cls_name == "nd") {
    spec.cls = LevelClass::NonDistinguishing;
  } else if (cls_name == "d") {
    spec.cls = LevelClass::Distinguishing;
  } else {
    throw ValidationError("gen: --class must be nd or d");
  }
  spec.wall_probability = wall_probability;
  spec.active_size = active_size;
  spec.corner_region = corner_region;
  spec.validate();
  Rng rng(seed);
  std::vector<Level> levels;
  levels.reserve(count);
  for (int i = 0; i < count; ++i) levels.push_back(generate(spec, rng));
  if (out_path.empty() || out_path == "-") {
    std::cout << write_levels(levels);
  } else {
    write_levels_file(out_path, levels);
    std::fprintf(stderr, "wrote %d levels to %s\n", count, out_path.c_str());
  }
  return 0;
}

int cmd_solve(const std::string& levels_path, double gamma, int max_steps) {
  DiscountSpec discount{gamma, max_steps};
  discount.validate();
  std::vector<Level> levels = read_levels_file(levels_path);
  for (size_t i = 0; i < levels.size(); ++i) {
    Classification cls = classify(levels[i]);
    json row;
    row["index"] = i;
    row["env"] = env_kind_name(level_kind(levels[i]));
    row["digest"] = hex_u64(level_digest(levels[i]));
    row["max_true_return"] = oracle_max_return(levels[i], discount);
    row["class"] = class_kind_name(cls.kind);
    row["goal_reachable"] = cls.goal_reachable;
    row["proxy_reachable"] = cls.proxy_reachable;
    std::cout << row.dump() << "\n";
  }
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& method,
              const std::string& estimator, const std::string& env_name, double alpha,
              int64_t steps, int64_t seed, const std::string& out_dir) {
  RunConfig config;
  if (!config_path.empty()) config = load_run_config(config_path);
  if (!method.empty()) config.adversary.method = ued_method_from_name(method);
  if (!estimator.empty()) config.adversary.estimator = estimator_kind_from_name(estimator);
  if (!env_name.empty()) config.env = env_kind_from_name(env_name);
  if (alpha >= 0.0) config.alpha = alpha;
  if (steps > 0) config.train.steps = steps;
  if (seed >= 0) config.seed = static_cast<uint64_t>(seed);
  if (!out_dir.empty()) config.output_dir = out_dir;
  apply_output_dir_override(config);
  RunArtifacts artifacts = run_experiment(config);
  std::fprintf(stderr, "metrics:  %s\nsnapshot: %s\nmanifest: %s\n",
               artifacts.metrics_path.c_str(), artifacts.snapshot_path.c_str(),
               artifacts.manifest_path.c_str());
  const MetricsRow& last = artifacts.rows.back();
  std::fprintf(stderr,
               "final: iteration=%lld env_steps=%lld eval_d=%.4f eval_nd=%.4f eval_proxy=%.4f\n",
               static_cast<long long>(last.iteration), static_cast<long long>(last.env_steps),
               last.mean_eval_return_distinguishing, last.mean_eval_return_nondistinguishing,
               last.mean_eval_proxy_return);
  return 0;
}

int cmd_eval(const std::string& policy_spec, const std::string& levels_path,
             const std::string& reward_name, int budget, uint64_t seed, double gamma,
             int max_steps) {
  PolicyHandle policy = resolve_policy(policy_spec);
  std::vector<Level> levels = read_levels_file(levels_path);
  EvalProtocol protocol;
  protocol.env_step_budget = budget;
  if (reward_name == "true") {
    protocol.reward = RewardSelector::True;
  } else if (reward_name == "proxy") {
    protocol.reward = RewardSelector::Proxy;
  } else {
    throw ValidationError("eval: --reward must be true or proxy");
  }
  DiscountSpec discount{gamma, max_steps};
  EvalResult result = evaluate(policy.get(), levels, protocol, discount, seed);
  json out;
  out["mean"] = result.mean;
  out["std_error"] = result.std_error;
  out["episodes"] = result.episodes;
  out["env_steps"] = result.env_steps;
  out["levels"] = levels.size();
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_theory(const std::string& suite, int instances, uint64_t seed, bool as_json) {
  std::vector<SuiteResult> results = run_theory_suites(suite, instances, seed);
  bool all_passed = true;
  json report = json::array();
  for (const SuiteResult& r : results) {
    all_passed = all_passed && r.passed();
    if (as_json) {
      json item;
      item["suite"] = r.suite;
      item["instances"] = r.instances;
      item["violations"] = r.violations;
      item["seed"] = r.seed;
      item["failures"] = r.failures;
      report.push_back(std::move(item));
    } else {
      std::printf("%-10s instances=%d violations=%d %s\n", r.suite.c_str(), r.instances,
                  r.violations, r.passed() ? "ok" : "FAILED");
      for (const std::string& f : r.failures) std::printf("  %s\n", f.c_str());
    }
  }
  if (as_json) std::cout << report.dump(2) << "\n";
  return all_passed ? 0 : 1;
}

int cmd_heatmap(const std::string& policy_spec, const std::string& base_path, int budget,
                uint64_t seed, double gamma, int max_steps, const std::string& out_path) {
  PolicyHandle policy = resolve_policy(policy_spec);
  std::vector<Level> levels = read_levels_file(base_path);
  if (levels.empty()) throw ValidationError("heatmap: base file holds no levels");
  const auto* corner = std::get_if<CornerLevel>(&levels.front());
  if (!corner) throw ValidationError("heatmap: base level must be a corner level");
  EvalProtocol protocol;
  protocol.env_step_budget = budget;
  protocol.reward = RewardSelector::True;
  DiscountSpec discount{gamma, max_steps};
  HeatmapGrid grid = emit_heatmap(policy.get(), *corner, protocol, discount, seed);
  if (out_path.empty() || out_path == "-") {
    write_heatmap_json(std::cout, grid);
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ValidationError("heatmap: cannot write " + out_path);
    write_heatmap_json(out, grid);
    std::fprintf(stderr, "wrote heatmap (%d masked cells) to %s\n", grid.masked_count(),
                 out_path.c_str());
  }
  return 0;
}

int cmd_replay(const std::string& manifest_path, std::string replay_dir) {
  if (replay_dir.empty()) {
    replay_dir =
        (std::filesystem::path(manifest_path).parent_path() / "replay").string();
  }
  bool identical = replay_run(manifest_path, replay_dir);
  std::printf("replay: %s\n", identical ? "identical" : "MISMATCH");
  return identical ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grid-world workbench for studying regret-driven curricula"};
  app.require_subcommand(1);

  // gen
  std::string gen_env = "corner", gen_cls = "nd", gen_out;
  int gen_count = 10;
  uint64_t gen_seed = 0;
  double gen_wall = 0.25;
  int gen_active = kGridSize, gen_corner_region = kGridSize;
  CLI::App* gen = app.add_subcommand("gen", "Generate procedural levels");
  gen->add_option("--env", gen_env, "corner | dish | keys");
  gen->add_option("--class", gen_cls, "nd | d");
  gen->add_option("--count", gen_count, "number of levels")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--wall-prob", gen_wall, "wall probability");
  gen->add_option("--active-size", gen_active, "active square side");
  gen->add_option("--corner-region", gen_corner_region, "distinguishing cheese region");
  gen->add_option("--out", gen_out, "output file (default stdout)");

  // solve
  std::string solve_levels;
  double solve_gamma = 0.999;
  int solve_max_steps = kMaxEpisodeSteps;
  CLI::App* solve = app.add_subcommand("solve", "Oracle-solve and classify levels");
  solve->add_option("--levels", solve_levels, "levels file")->required();
  solve->add_option("--gamma", solve_gamma, "discount factor");
  solve->add_option("--max-steps", solve_max_steps, "episode cap");

  // train
  std::string train_config, train_method, train_estimator, train_env, train_out;
  double train_alpha = -1.0;
  int64_t train_steps = 0, train_seed = -1;
  CLI::App* train = app.add_subcommand("train", "Run a training experiment");
  train->add_option("--config", train_config, "config file (JSON)");
  train->add_option("--method", train_method, "dr | plr | accel");
  train->add_option("--estimator", train_estimator, "max_latest | oracle_latest | neg_value");
  train->add_option("--env", train_env, "corner | dish | keys");
  train->add_option("--alpha", train_alpha, "distinguishing mixture mass");
  train->add_option("--steps", train_steps, "adversary iterations");
  train->add_option("--seed", train_seed, "root seed");
  train->add_option("--out-dir", train_out, "output directory");

  // eval
  std::string eval_policy, eval_levels, eval_reward = "true";
  int eval_budget = 512, eval_max_steps = kMaxEpisodeSteps;
  uint64_t eval_seed = 0;
  double eval_gamma = 0.999;
  CLI::App* eval = app.add_subcommand("eval", "Evaluate a policy on a level file");
  eval->add_option("--policy", eval_policy,
                   "scripted-true | scripted-proxy | uniform | snapshot path")
      ->required();
  eval->add_option("--levels", eval_levels, "levels file")->required();
  eval->add_option("--reward", eval_reward, "true | proxy");
  eval->add_option("--budget", eval_budget, "env-step budget per level");
  eval->add_option("--seed", eval_seed, "rollout seed");
  eval->add_option("--gamma", eval_gamma, "discount factor");
  eval->add_option("--max-steps", eval_max_steps, "episode cap");

  // theory
  std::string theory_suite = "all";
  int theory_instances = 100;
  uint64_t theory_seed = 0;
  bool theory_json = false;
  CLI::App* theory = app.add_subcommand("theory", "Machine-check the tabular results");
  theory->add_option("--suite", theory_suite,
                     "susceptibility | transfer | regret-identity | equilibria | decomposition | restricted-transfer | necessity | mmev | all");
  theory->add_option("--instances", theory_instances, "instances per suite")
      ->check(CLI::PositiveNumber);
  theory->add_option("--seed", theory_seed, "suite seed");
  theory->add_flag("--json", theory_json, "emit a JSON report");

  // heatmap
  std::string hm_policy, hm_base, hm_out;
  int hm_budget = 512, hm_max_steps = kMaxEpisodeSteps;
  uint64_t hm_seed = 0;
  double hm_gamma = 0.999;
  CLI::App* heatmap = app.add_subcommand("heatmap", "Per-cheese-position return grid");
  heatmap->add_option("--policy", hm_policy,
                      "scripted-true | scripted-proxy | uniform | snapshot path")
      ->required();
  heatmap->add_option("--base", hm_base, "levels file; first level fixes walls and spawn")
      ->required();
  heatmap->add_option("--budget", hm_budget, "env-step budget per cell");
  heatmap->add_option("--seed", hm_seed, "rollout seed");
  heatmap->add_option("--gamma", hm_gamma, "discount factor");
  heatmap->add_option("--max-steps", hm_max_steps, "episode cap");
  heatmap->add_option("--out", hm_out, "output file (default stdout)");

  // replay
  std::string replay_manifest, replay_dir;
  CLI::App* replay = app.add_subcommand("replay", "Re-run a manifest and compare artifacts");
  replay->add_option("manifest", replay_manifest, "manifest.json path")->required();
  replay->add_option("--dir", replay_dir, "replay output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      return cmd_gen(gen_env, gen_cls, gen_count, gen_seed, gen_wall, gen_active,
                     gen_corner_region, gen_out);
    }
    if (solve->parsed()) return cmd_solve(solve_levels, solve_gamma, solve_max_steps);
    if (train->parsed()) {
      return cmd_train(train_config, train_method, train_estimator, train_env, train_alpha,
                       train_steps, train_seed, train_out);
    }
    if (eval->parsed()) {
      return cmd_eval(eval_policy, eval_levels, eval_reward, eval_budget, eval_seed, eval_gamma,
                      eval_max_steps);
    }
    if (theory->parsed()) {
      return cmd_theory(theory_suite, theory_instances, theory_seed, theory_json);
    }
    if (heatmap->parsed()) {
      return cmd_heatmap(hm_policy, hm_base, hm_budget, hm_seed, hm_gamma, hm_max_steps, hm_out);
    }
    if (replay->parsed()) return cmd_replay(replay_manifest, replay_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
