#include "aiig/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "aiig/run_io.hpp"

namespace aiig {

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::Full: return "full";
    case Variant::NoEO: return "no_EO";
    case Variant::NoEONoCE: return "no_EO_no_CE";
    case Variant::SingleGamma: return "single_gamma";
  }
  return "?";
}

Variant variant_from_name(const std::string& name) {
  if (name == "full") return Variant::Full;
  if (name == "no_EO") return Variant::NoEO;
  if (name == "no_EO_no_CE") return Variant::NoEONoCE;
  if (name == "single_gamma") return Variant::SingleGamma;
  throw std::invalid_argument("unknown variant '" + name +
                              "' (expected full, no_EO, no_EO_no_CE, or single_gamma)");
}

namespace {

// Strict reader: every key must be consumed, unknown keys are build errors
// that name themselves.
class Section {
 public:
  Section(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
      throw std::invalid_argument("config section '" + path_ + "' must be a JSON object");
    }
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw std::invalid_argument("config key '" + join(key) + "' has the wrong type");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }

  const nlohmann::json* sub(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string join(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      (void)value;
      if (!seen_.count(key)) {
        throw std::invalid_argument("unknown config key '" + join(key.c_str()) + "'");
      }
    }
  }

 private:
  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void parse_env(const nlohmann::json& j, GameConfig& env) {
  Section s(j, "env");
  s.get("world_size", env.world_size);
  s.get("move_step", env.move_step);
  s.get("tag_range", env.tag_range);
  s.get("river_y_min", env.river_y_min);
  s.get("probe_accuracy", env.probe_accuracy);
  s.get("probe_cost_rate", env.probe_cost_rate);
  s.get("tag_cost", env.tag_cost);
  s.get("reward_tag_enemy", env.reward_tag_enemy);
  s.get("reward_tag_ally", env.reward_tag_ally);
  s.get("reward_tagged", env.reward_tagged);
  s.get("distance_cost_rate", env.distance_cost_rate);
  s.get("base_epsilon", env.base_epsilon);
  s.get("max_steps", env.max_steps);
  std::vector<double> pair;
  pair = {env.protagonist_start.x, env.protagonist_start.y};
  s.get("protagonist_start", pair);
  if (pair.size() != 2) throw std::invalid_argument("env.protagonist_start needs [x, y]");
  env.protagonist_start = {pair[0], pair[1]};
  pair = {env.ally_base.x, env.ally_base.y};
  s.get("ally_base", pair);
  if (pair.size() != 2) throw std::invalid_argument("env.ally_base needs [x, y]");
  env.ally_base = {pair[0], pair[1]};
  pair = {env.enemy_base.x, env.enemy_base.y};
  s.get("enemy_base", pair);
  if (pair.size() != 2) throw std::invalid_argument("env.enemy_base needs [x, y]");
  env.enemy_base = {pair[0], pair[1]};
  s.finish();
}

void parse_learner(const nlohmann::json& j, LearnerConfig& l) {
  Section s(j, "learner");
  s.get("gamma", l.gamma);
  s.get("actor_lr", l.actor_lr);
  s.get("critic_lr", l.critic_lr);
  s.get("tau", l.tau);
  s.get("exploration_noise_std", l.exploration_noise_std);
  s.get("noise_clip", l.noise_clip);
  s.get("policy_delay", l.policy_delay);
  s.get("batch_size", l.batch_size);
  s.finish();
}

void parse_distill(const nlohmann::json& j, DistillConfig& d) {
  Section s(j, "ensemble.distill");
  s.get("steps", d.steps);
  s.get("batch", d.batch);
  s.get("lr", d.lr);
  s.get("holdout_frac", d.holdout_frac);
  s.get("hidden", d.hidden);
  s.get("min_samples", d.min_samples);
  s.finish();
}

void parse_ensemble(const nlohmann::json& j, EnsembleConfig& e) {
  Section s(j, "ensemble");
  s.get("gammas", e.gammas);
  s.get("episodes_per_epoch", e.episodes_per_epoch);
  s.get("grad_steps_per_epoch", e.grad_steps_per_epoch);
  s.get("ema_alpha", e.ema_alpha);
  s.get("evolution_enabled", e.evolution_enabled);
  s.get("evo_population", e.evo_population);
  s.get("evo_sigma", e.evo_sigma);
  s.get("evo_episodes", e.evo_episodes);
  s.get("evo_margin", e.evo_margin);
  s.get("distill_cadence_epochs", e.distill_cadence_epochs);
  s.get("buffer_capacity", e.buffer_capacity);
  if (const nlohmann::json* d = s.sub("distill")) parse_distill(*d, e.distill);
  s.finish();
}

void parse_recurrent(const nlohmann::json& j, RecurrentLearnerConfig& r) {
  Section s(j, "recurrent");
  s.get("hidden_size", r.hidden_size);
  s.get("batch_episodes", r.batch_episodes);
  s.get("min_episodes", r.min_episodes);
  s.get("episode_capacity", r.episode_capacity);
  s.finish();
}

void parse_meta(const nlohmann::json& j, MetaConfig& m) {
  Section s(j, "meta");
  s.get("lambda1", m.lambda1);
  s.get("lambda2", m.lambda2);
  s.get("T0", m.T0);
  s.get("T_min", m.T_min);
  s.get("decay", m.decay);
  s.get("proposals", m.proposals);
  s.get("cadence_epochs", m.cadence_epochs);
  s.get("eval_train_steps", m.eval_train_steps);
  s.get("eval_episodes", m.eval_episodes);
  s.get("eval_gamma", m.eval_gamma);
  s.get("eval_buffer_capacity", m.eval_buffer_capacity);
  s.finish();
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  Section s(j, "");
  s.get("seed", cfg.seed);
  std::string mode = mode_name(cfg.mode);
  s.get("mode", mode);
  cfg.mode = mode_from_name(mode);
  std::string variant = variant_name(cfg.variant);
  s.get("variant", variant);
  cfg.variant = variant_from_name(variant);
  s.get("single_gamma", cfg.single_gamma);
  s.get("epochs", cfg.epochs);
  s.get("output_dir", cfg.output_dir);
  s.get("deterministic", cfg.deterministic);
  if (const nlohmann::json* sub = s.sub("env")) parse_env(*sub, cfg.env);
  if (const nlohmann::json* sub = s.sub("learner")) parse_learner(*sub, cfg.learner);
  if (const nlohmann::json* sub = s.sub("ensemble")) parse_ensemble(*sub, cfg.ensemble);
  if (const nlohmann::json* sub = s.sub("recurrent")) parse_recurrent(*sub, cfg.recurrent);
  if (const nlohmann::json* sub = s.sub("meta")) parse_meta(*sub, cfg.meta);
  s.finish();
  cfg.validate();
  return cfg;
}

void ExperimentConfig::validate() const {
  env.validate();
  auto fail = [](const std::string& key, const std::string& why) {
    throw std::invalid_argument("config key '" + key + "' " + why);
  };
  if (epochs < 0) fail("epochs", "must be nonnegative");
  if (!(single_gamma > 0 && single_gamma < 1)) fail("single_gamma", "must lie in (0, 1)");
  if (!(learner.gamma > 0 && learner.gamma < 1)) fail("learner.gamma", "must lie in (0, 1)");
  if (learner.actor_lr <= 0) fail("learner.actor_lr", "must be positive");
  if (learner.critic_lr <= 0) fail("learner.critic_lr", "must be positive");
  if (!(learner.tau > 0 && learner.tau <= 1)) fail("learner.tau", "must lie in (0, 1]");
  if (learner.policy_delay < 1) fail("learner.policy_delay", "must be at least 1");
  if (learner.batch_size == 0) fail("learner.batch_size", "must be positive");
  if (ensemble.gammas.empty()) fail("ensemble.gammas", "must not be empty");
  for (double g : ensemble.gammas) {
    if (!(g > 0 && g < 1)) fail("ensemble.gammas", "entries must lie in (0, 1)");
  }
  if (ensemble.episodes_per_epoch < 1) fail("ensemble.episodes_per_epoch", "must be positive");
  if (ensemble.grad_steps_per_epoch < 0) {
    fail("ensemble.grad_steps_per_epoch", "must be nonnegative");
  }
  if (!(ensemble.ema_alpha > 0 && ensemble.ema_alpha <= 1)) {
    fail("ensemble.ema_alpha", "must lie in (0, 1]");
  }
  if (ensemble.evo_population < 0) fail("ensemble.evo_population", "must be nonnegative");
  if (ensemble.evo_sigma < 0) fail("ensemble.evo_sigma", "must be nonnegative");
  if (ensemble.evo_episodes < 1) fail("ensemble.evo_episodes", "must be positive");
  if (ensemble.distill_cadence_epochs < 1) {
    fail("ensemble.distill_cadence_epochs", "must be positive");
  }
  if (ensemble.buffer_capacity == 0) fail("ensemble.buffer_capacity", "must be positive");
  if (ensemble.distill.steps < 1) fail("ensemble.distill.steps", "must be positive");
  if (ensemble.distill.batch == 0) fail("ensemble.distill.batch", "must be positive");
  if (ensemble.distill.lr <= 0) fail("ensemble.distill.lr", "must be positive");
  if (!(ensemble.distill.holdout_frac > 0 && ensemble.distill.holdout_frac < 1)) {
    fail("ensemble.distill.holdout_frac", "must lie in (0, 1)");
  }
  if (ensemble.distill.min_samples == 0) fail("ensemble.distill.min_samples", "must be positive");
  if (recurrent.hidden_size < 1) fail("recurrent.hidden_size", "must be positive");
  if (recurrent.batch_episodes == 0) fail("recurrent.batch_episodes", "must be positive");
  if (recurrent.min_episodes == 0) fail("recurrent.min_episodes", "must be positive");
  if (recurrent.episode_capacity == 0) fail("recurrent.episode_capacity", "must be positive");
  if (meta.T0 <= 0) fail("meta.T0", "must be positive");
  if (meta.T_min <= 0) fail("meta.T_min", "must be positive");
  if (meta.T_min > meta.T0) fail("meta.T_min", "must not exceed meta.T0");
  if (!(meta.decay > 0 && meta.decay <= 1)) fail("meta.decay", "must lie in (0, 1]");
  if (meta.proposals < 0) fail("meta.proposals", "must be nonnegative");
  if (meta.cadence_epochs < 0) fail("meta.cadence_epochs", "must be nonnegative");
  if (meta.eval_train_steps < 0) fail("meta.eval_train_steps", "must be nonnegative");
  if (meta.eval_episodes < 1) fail("meta.eval_episodes", "must be positive");
  if (!(meta.eval_gamma > 0 && meta.eval_gamma < 1)) fail("meta.eval_gamma", "must lie in (0, 1)");
  if (meta.eval_buffer_capacity == 0) fail("meta.eval_buffer_capacity", "must be positive");
}

std::vector<double> ExperimentConfig::population_gammas() const {
  switch (variant) {
    case Variant::Full:
    case Variant::NoEO:
      return ensemble.gammas;
    case Variant::NoEONoCE:
    case Variant::SingleGamma:
      return {single_gamma};
  }
  return ensemble.gammas;
}

bool ExperimentConfig::evolution_active() const {
  if (variant == Variant::NoEONoCE || variant == Variant::SingleGamma) return false;
  return ensemble.evolution_enabled;
}

bool ExperimentConfig::meta_active() const {
  return variant == Variant::Full && meta.proposals > 0;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["mode"] = mode_name(mode);
  j["variant"] = variant_name(variant);
  j["single_gamma"] = single_gamma;
  j["epochs"] = epochs;
  j["output_dir"] = output_dir;
  j["deterministic"] = deterministic;
  j["env"] = {{"world_size", env.world_size},
              {"move_step", env.move_step},
              {"tag_range", env.tag_range},
              {"river_y_min", env.river_y_min},
              {"probe_accuracy", env.probe_accuracy},
              {"probe_cost_rate", env.probe_cost_rate},
              {"tag_cost", env.tag_cost},
              {"reward_tag_enemy", env.reward_tag_enemy},
              {"reward_tag_ally", env.reward_tag_ally},
              {"reward_tagged", env.reward_tagged},
              {"distance_cost_rate", env.distance_cost_rate},
              {"base_epsilon", env.base_epsilon},
              {"max_steps", env.max_steps},
              {"protagonist_start", {env.protagonist_start.x, env.protagonist_start.y}},
              {"ally_base", {env.ally_base.x, env.ally_base.y}},
              {"enemy_base", {env.enemy_base.x, env.enemy_base.y}}};
  j["learner"] = {{"gamma", learner.gamma},
                  {"actor_lr", learner.actor_lr},
                  {"critic_lr", learner.critic_lr},
                  {"tau", learner.tau},
                  {"exploration_noise_std", learner.exploration_noise_std},
                  {"noise_clip", learner.noise_clip},
                  {"policy_delay", learner.policy_delay},
                  {"batch_size", learner.batch_size}};
  j["ensemble"] = {{"gammas", ensemble.gammas},
                   {"episodes_per_epoch", ensemble.episodes_per_epoch},
                   {"grad_steps_per_epoch", ensemble.grad_steps_per_epoch},
                   {"ema_alpha", ensemble.ema_alpha},
                   {"evolution_enabled", ensemble.evolution_enabled},
                   {"evo_population", ensemble.evo_population},
                   {"evo_sigma", ensemble.evo_sigma},
                   {"evo_episodes", ensemble.evo_episodes},
                   {"evo_margin", ensemble.evo_margin},
                   {"distill_cadence_epochs", ensemble.distill_cadence_epochs},
                   {"buffer_capacity", ensemble.buffer_capacity},
                   {"distill",
                    {{"steps", ensemble.distill.steps},
                     {"batch", ensemble.distill.batch},
                     {"lr", ensemble.distill.lr},
                     {"holdout_frac", ensemble.distill.holdout_frac},
                     {"hidden", ensemble.distill.hidden},
                     {"min_samples", ensemble.distill.min_samples}}}};
  j["recurrent"] = {{"hidden_size", recurrent.hidden_size},
                    {"batch_episodes", recurrent.batch_episodes},
                    {"min_episodes", recurrent.min_episodes},
                    {"episode_capacity", recurrent.episode_capacity}};
  j["meta"] = {{"lambda1", meta.lambda1},
               {"lambda2", meta.lambda2},
               {"T0", meta.T0},
               {"T_min", meta.T_min},
               {"decay", meta.decay},
               {"proposals", meta.proposals},
               {"cadence_epochs", meta.cadence_epochs},
               {"eval_train_steps", meta.eval_train_steps},
               {"eval_episodes", meta.eval_episodes},
               {"eval_gamma", meta.eval_gamma},
               {"eval_buffer_capacity", meta.eval_buffer_capacity}};
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config: " + path.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return ExperimentConfig::from_json(j);
}

std::string run_dir_name(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << mode_name(cfg.mode) << '-' << variant_name(cfg.variant);
  if (cfg.variant == Variant::SingleGamma) os << "-g" << format_double(cfg.single_gamma);
  os << "-seed" << cfg.seed;
  return os.str();
}

}  // namespace aiig
