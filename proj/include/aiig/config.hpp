#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "aiig/ensemble.hpp"
#include "aiig/meta.hpp"
#include "aiig/recurrent_learner.hpp"
#include "aiig/rollout.hpp"
#include "aiig/tag_game.hpp"

namespace aiig {

enum class Variant { Full, NoEO, NoEONoCE, SingleGamma };
const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct ExperimentConfig {
  std::uint64_t seed = 1;
  PolicyMode mode = PolicyMode::Belief;
  Variant variant = Variant::Full;
  double single_gamma = 0.99;  // the one discount used by single_gamma runs
  int epochs = 50;             // self-play epochs before any annealing
  std::string output_dir = "runs";
  bool deterministic = false;

  GameConfig env;
  LearnerConfig learner;
  EnsembleConfig ensemble;
  RecurrentLearnerConfig recurrent;
  MetaConfig meta;

  // Gammas the population starts from (collapses to one for the single-member
  // variants) and whether evolution or annealing run at all.
  std::vector<double> population_gammas() const;
  bool evolution_active() const;
  bool meta_active() const;

  // Throws std::invalid_argument naming the offending key on unknown keys,
  // type errors, or out-of-range values.
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);

// "<mode>-<variant>[-g<gamma>]-seed<seed>"
std::string run_dir_name(const ExperimentConfig& cfg);

}  // namespace aiig
