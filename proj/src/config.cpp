#include "regretlab/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "regretlab/errors.hpp"

namespace regretlab {

namespace {

using nlohmann::json;

/// Rejects keys outside `allowed` so typos never pass silently.
void check_keys(const json& obj, const std::string& where,
                const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ValidationError("config: " + where + " must be an object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      throw ValidationError("config: unknown key \"" + item.key() + "\" in " + where);
    }
  }
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError("config: bad value for \"" + key + "\"");
  }
}

std::string reward_selector_name(RewardSelector sel) {
  return sel == RewardSelector::True ? "true" : "proxy";
}

RewardSelector reward_selector_from_name(const std::string& name) {
  if (name == "true") return RewardSelector::True;
  if (name == "proxy") return RewardSelector::Proxy;
  throw ValidationError("config: unknown reward selector \"" + name + "\"");
}

std::string edit_variant_name(EditSequenceVariant v) {
  switch (v) {
    case EditSequenceVariant::Identity: return "identity";
    case EditSequenceVariant::Constant: return "constant";
    case EditSequenceVariant::Binomial: return "binomial";
    case EditSequenceVariant::Unrestricted: return "unrestricted";
  }
  throw ContractError("unknown edit variant");
}

EditSequenceVariant edit_variant_from_name(const std::string& name) {
  if (name == "identity") return EditSequenceVariant::Identity;
  if (name == "constant") return EditSequenceVariant::Constant;
  if (name == "binomial") return EditSequenceVariant::Binomial;
  if (name == "unrestricted") return EditSequenceVariant::Unrestricted;
  throw ValidationError("config: unknown edit variant \"" + name + "\"");
}

}  // namespace

void TrainSpec::validate() const {
  if (steps < 1) throw ValidationError("config: train.steps must be positive");
  if (eval_every < 1) throw ValidationError("config: train.eval_every must be positive");
}

void EvalSpec::validate() const {
  if (n_levels < 1) throw ValidationError("config: eval.n_levels must be positive");
  protocol.validate();
}

MixtureSpec RunConfig::mixture() const {
  GeneratorSpec base;
  base.env = env;
  base.wall_probability = wall_probability;
  base.active_size = active_size;
  base.corner_region = corner_region;
  base.dish_channels = dish_channels;
  MixtureSpec mix;
  mix.alpha = alpha;
  mix.nd = base;
  mix.nd.cls = LevelClass::NonDistinguishing;
  mix.d = base;
  mix.d.cls = LevelClass::Distinguishing;
  return mix;
}

void RunConfig::validate() const {
  discount.validate();
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ValidationError("config: generator.alpha must be in [0, 1]");
  }
  mixture().validate();
  adversary.validate();
  learner.validate();
  train.validate();
  eval.validate();
  if (output_dir.empty()) throw ValidationError("config: output.dir must be nonempty");
}

RunConfig parse_run_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: not valid JSON: ") + e.what());
  }
  check_keys(doc, "the top level",
             {"format_version", "seed", "environment", "generator", "adversary", "learner",
              "train", "eval", "output"});
  if (!doc.contains("format_version")) {
    throw ValidationError("config: missing format_version");
  }
  if (!doc.at("format_version").is_number_integer() ||
      doc.at("format_version").get<int>() != kConfigFormatVersion) {
    throw ValidationError("config: unsupported format_version");
  }

  RunConfig config;
  config.seed = get_or<uint64_t>(doc, "seed", 0);

  if (doc.contains("environment")) {
    const json& env = doc.at("environment");
    check_keys(env, "environment", {"kind", "gamma", "max_steps"});
    config.env = env_kind_from_name(get_or<std::string>(env, "kind", "corner"));
    config.discount.gamma = get_or<double>(env, "gamma", config.discount.gamma);
    config.discount.max_steps = get_or<int>(env, "max_steps", config.discount.max_steps);
  }

  if (doc.contains("generator")) {
    const json& gen = doc.at("generator");
    check_keys(gen, "generator",
               {"alpha", "wall_probability", "active_size", "corner_region", "dish_channels"});
    config.alpha = get_or<double>(gen, "alpha", config.alpha);
    config.wall_probability = get_or<double>(gen, "wall_probability", config.wall_probability);
    config.active_size = get_or<int>(gen, "active_size", config.active_size);
    config.corner_region = get_or<int>(gen, "corner_region", config.corner_region);
    config.dish_channels = get_or<int>(gen, "dish_channels", config.dish_channels);
  }

  if (doc.contains("adversary")) {
    const json& adv = doc.at("adversary");
    check_keys(adv, "adversary",
               {"method", "estimator", "replay_rate", "temperature", "staleness_coeff",
                "buffer_capacity", "batch_size", "rollout_length", "edit"});
    config.adversary.method = ued_method_from_name(get_or<std::string>(adv, "method", "dr"));
    config.adversary.estimator =
        estimator_kind_from_name(get_or<std::string>(adv, "estimator", "max_latest"));
    // Replay-rate default depends on the method: one replay per two generate
    // cycles for plain replay, one per one for the editing variant.
    double default_replay = config.adversary.method == UedMethod::Accel ? 0.5 : 0.33;
    config.adversary.replay_rate = get_or<double>(adv, "replay_rate", default_replay);
    config.adversary.temperature = get_or<double>(adv, "temperature", 0.1);
    config.adversary.staleness_coeff = get_or<double>(adv, "staleness_coeff", 0.1);
    config.adversary.buffer_capacity = get_or<int>(adv, "buffer_capacity", 4096);
    config.adversary.batch_size = get_or<int>(adv, "batch_size", 256);
    config.adversary.rollout_length = get_or<int>(adv, "rollout_length", 128);
    if (adv.contains("edit")) {
      const json& edit = adv.at("edit");
      check_keys(edit, "adversary.edit", {"variant", "n_edits", "alpha"});
      config.adversary.edit.variant =
          edit_variant_from_name(get_or<std::string>(edit, "variant", "identity"));
      config.adversary.edit.n_edits = get_or<int>(edit, "n_edits", 12);
      config.adversary.edit.alpha = get_or<double>(edit, "alpha", 0.0);
    }
  } else {
    config.adversary.replay_rate = 0.33;
  }

  if (doc.contains("learner")) {
    const json& lrn = doc.at("learner");
    check_keys(lrn, "learner",
               {"kind", "learning_rate", "epsilon", "entropy_bonus", "train_reward"});
    config.learner.kind =
        learner_kind_from_name(get_or<std::string>(lrn, "kind", "tabular_q"));
    config.learner.learning_rate = get_or<double>(lrn, "learning_rate", 0.1);
    config.learner.epsilon = get_or<double>(lrn, "epsilon", 0.1);
    config.learner.entropy_bonus = get_or<double>(lrn, "entropy_bonus", 0.01);
    config.learner.train_reward =
        reward_selector_from_name(get_or<std::string>(lrn, "train_reward", "true"));
  }

  if (doc.contains("train")) {
    const json& train = doc.at("train");
    check_keys(train, "train", {"steps", "eval_every"});
    config.train.steps = get_or<int64_t>(train, "steps", config.train.steps);
    config.train.eval_every = get_or<int64_t>(train, "eval_every", config.train.eval_every);
  }

  if (doc.contains("eval")) {
    const json& eval = doc.at("eval");
    check_keys(eval, "eval", {"n_levels", "env_step_budget"});
    config.eval.n_levels = get_or<int>(eval, "n_levels", config.eval.n_levels);
    config.eval.protocol.env_step_budget =
        get_or<int>(eval, "env_step_budget", config.eval.protocol.env_step_budget);
  }

  if (doc.contains("output")) {
    const json& out = doc.at("output");
    check_keys(out, "output", {"dir"});
    config.output_dir = get_or<std::string>(out, "dir", config.output_dir);
  }

  config.validate();
  return config;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string serialize_run_config(const RunConfig& config) {
  json doc;
  doc["format_version"] = kConfigFormatVersion;
  doc["seed"] = config.seed;
  doc["environment"] = {{"kind", env_kind_name(config.env)},
                        {"gamma", config.discount.gamma},
                        {"max_steps", config.discount.max_steps}};
  doc["generator"] = {{"alpha", config.alpha},
                      {"wall_probability", config.wall_probability},
                      {"active_size", config.active_size},
                      {"corner_region", config.corner_region},
                      {"dish_channels", config.dish_channels}};
  doc["adversary"] = {{"method", ued_method_name(config.adversary.method)},
                      {"estimator", estimator_kind_name(config.adversary.estimator)},
                      {"replay_rate", config.adversary.replay_rate},
                      {"temperature", config.adversary.temperature},
                      {"staleness_coeff", config.adversary.staleness_coeff},
                      {"buffer_capacity", config.adversary.buffer_capacity},
                      {"batch_size", config.adversary.batch_size},
                      {"rollout_length", config.adversary.rollout_length},
                      {"edit",
                       {{"variant", edit_variant_name(config.adversary.edit.variant)},
                        {"n_edits", config.adversary.edit.n_edits},
                        {"alpha", config.adversary.edit.alpha}}}};
  doc["learner"] = {{"kind", learner_kind_name(config.learner.kind)},
                    {"learning_rate", config.learner.learning_rate},
                    {"epsilon", config.learner.epsilon},
                    {"entropy_bonus", config.learner.entropy_bonus},
                    {"train_reward", reward_selector_name(config.learner.train_reward)}};
  doc["train"] = {{"steps", config.train.steps}, {"eval_every", config.train.eval_every}};
  doc["eval"] = {{"n_levels", config.eval.n_levels},
                 {"env_step_budget", config.eval.protocol.env_step_budget}};
  doc["output"] = {{"dir", config.output_dir}};
  return doc.dump(2) + "\n";
}

uint64_t config_digest(const RunConfig& config) {
  std::string text = serialize_run_config(config);
  uint64_t hash = 1469598103934665603ull;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 1099511628211ull;
  }
  return hash;
}

}  // namespace regretlab
