#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "aiig/belief.hpp"
#include "aiig/learner.hpp"
#include "aiig/replay.hpp"
#include "aiig/rnn.hpp"
#include "aiig/tag_game.hpp"

namespace aiig {

// --- Policy interfaces ---

// Opponent policies return the sampled action plus the noiseless distribution
// at the observation (what the distiller will regress on).
class OpponentPolicy {
 public:
  virtual ~OpponentPolicy() = default;
  virtual std::pair<OpponentAction, std::array<double, kNumOpponentActions>> act(
      const OpponentObs& obs, std::mt19937_64& rng) = 0;
};

// Wraps one ensemble member's per-type actor-critics.
class LearnedOpponent : public OpponentPolicy {
 public:
  LearnedOpponent(const ActorCritic* ally, const ActorCritic* enemy, const GameConfig* cfg,
                  const LearnerConfig* learner_cfg, bool explore);
  std::pair<OpponentAction, std::array<double, kNumOpponentActions>> act(
      const OpponentObs& obs, std::mt19937_64& rng) override;

 private:
  std::array<const ActorCritic*, kNumTypes> ac_;
  const GameConfig* cfg_;
  const LearnerConfig* learner_cfg_;
  bool explore_;
};

// Per-type bare actors (mutants during neuroevolution). Greedy only.
class ActorOnlyOpponent : public OpponentPolicy {
 public:
  ActorOnlyOpponent(const DenseNet* ally_actor, const DenseNet* enemy_actor,
                    const GameConfig* cfg);
  std::pair<OpponentAction, std::array<double, kNumOpponentActions>> act(
      const OpponentObs& obs, std::mt19937_64& rng) override;

 private:
  std::array<const DenseNet*, kNumTypes> actors_;
  const GameConfig* cfg_;
};

class ScriptedOpponentPolicy : public OpponentPolicy {
 public:
  ScriptedOpponentPolicy(ScriptedKind kind, const GameConfig* cfg) : kind_(kind), cfg_(cfg) {}
  std::pair<OpponentAction, std::array<double, kNumOpponentActions>> act(
      const OpponentObs& obs, std::mt19937_64& rng) override;

 private:
  ScriptedKind kind_;
  const GameConfig* cfg_;
};

// Protagonist policies consume mode-specific feature vectors prepared by
// run_episode and return the sampled action plus the noiseless distribution.
class ProtagonistPolicy {
 public:
  virtual ~ProtagonistPolicy() = default;
  virtual void begin_episode() {}
  virtual std::pair<ProtagonistAction, std::vector<double>> act(std::span<const double> features,
                                                                std::mt19937_64& rng) = 0;
};

class LearnedProtagonist : public ProtagonistPolicy {
 public:
  LearnedProtagonist(const ActorCritic* ac, const LearnerConfig* cfg, bool explore)
      : ac_(ac), cfg_(cfg), explore_(explore) {}
  std::pair<ProtagonistAction, std::vector<double>> act(std::span<const double> features,
                                                        std::mt19937_64& rng) override;

 private:
  const ActorCritic* ac_;
  const LearnerConfig* cfg_;
  bool explore_;
};

// GRU actor fed raw observation features; keeps hidden state across the episode.
class RecurrentProtagonist : public ProtagonistPolicy {
 public:
  RecurrentProtagonist(const RecurrentNet* net, const LearnerConfig* cfg, bool explore);
  void begin_episode() override;
  std::pair<ProtagonistAction, std::vector<double>> act(std::span<const double> features,
                                                        std::mt19937_64& rng) override;

 private:
  const RecurrentNet* net_;
  const LearnerConfig* cfg_;
  bool explore_;
  std::vector<double> hidden_;
};

class UniformRandomProtagonist : public ProtagonistPolicy {
 public:
  std::pair<ProtagonistAction, std::vector<double>> act(std::span<const double> features,
                                                        std::mt19937_64& rng) override;
};

class FixedActionProtagonist : public ProtagonistPolicy {
 public:
  explicit FixedActionProtagonist(ProtagonistAction a) : action_(a) {}
  std::pair<ProtagonistAction, std::vector<double>> act(std::span<const double> features,
                                                        std::mt19937_64& rng) override;

 private:
  ProtagonistAction action_;
};

// --- Episode runner ---

enum class PolicyMode { Belief, Recurrent };
const char* mode_name(PolicyMode m);
PolicyMode mode_from_name(const std::string& name);

struct TraceStep {
  int step = 0;  // 0 for the initial snapshot
  Vec2 protagonist_pos, opponent_pos;
  std::optional<ProtagonistAction> a_p;
  std::optional<OpponentAction> a_o;
  double r_p = 0, r_o = 0;
  std::optional<AgentType> probe_reading;
  std::optional<Belief> belief;  // post-update; the snapshot row carries the prior
};

struct EpisodeResult {
  std::vector<TraceStep> trace;  // trace[0] = initial snapshot
  std::vector<Transition> protagonist_transitions;
  std::vector<Transition> opponent_transitions;
  double protagonist_state_return = 0;   // sum of true-type rewards
  double protagonist_stored_return = 0;  // sum of the rewards actually stored
  double opponent_return = 0;
  AgentType opponent_type = AgentType::Ally;
  Outcome outcome = Outcome::Running;
  int length = 0;
};

struct EpisodeOptions {
  std::optional<AgentType> forced_type;
  Belief initial_belief = uniform_belief();
  int opponent_member_id = -1;
  TransitionSource source = TransitionSource::Learner;
};

// Runs one episode. In Belief mode the protagonist sees encoded belief features
// and its stored rewards are belief-space (expected under the pre-transition
// belief); in Recurrent mode it sees raw observation features and true rewards.
// Opponent transitions always use true rewards and type-stripped features.
EpisodeResult run_episode(const GameConfig& env, ProtagonistPolicy& protagonist,
                          OpponentPolicy& opponent, const OpponentModelSet& models,
                          PolicyMode mode, std::mt19937_64& rng,
                          const EpisodeOptions& opts = {});

}  // namespace aiig
