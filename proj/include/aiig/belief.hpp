#pragma once

#include <array>
#include <functional>
#include <vector>

#include "aiig/net.hpp"
#include "aiig/tag_game.hpp"

namespace aiig {

// Exact Bayesian posterior over the hidden opponent type. The physical state is
// fully observed, so the filter tracks only the type marginal.

struct Belief {
  std::array<double, kNumTypes> probs {0.5, 0.5};

  double of(AgentType t) const { return probs[static_cast<int>(t)]; }
  double enemy() const { return of(AgentType::Enemy); }
  // Nonnegative entries summing to 1 within `eps`.
  bool valid(double eps = 1e-9) const;
};

Belief uniform_belief();
Belief point_mass(AgentType t);

// Everything a type-conditioned opponent model may condition on (the opponent's
// observation minus its private type).
struct OpponentContext {
  Vec2 protagonist_pos;
  Vec2 opponent_pos;
  int step = 0;
};

OpponentContext strip_type(const OpponentObs& obs);
OpponentObs with_type(const OpponentContext& ctx, AgentType t);

inline constexpr double kLikelihoodFloor = 1e-6;

// Per-type opponent action models feeding the filter's action update. Each
// model maps a context to a distribution over the four opponent moves.
class OpponentModelSet {
 public:
  using Policy = std::function<std::array<double, kNumOpponentActions>(const OpponentContext&)>;

  OpponentModelSet(Policy ally, Policy enemy);

  // Validates the returned distribution (nonnegative, sums to 1 within 1e-6).
  std::array<double, kNumOpponentActions> evaluate(AgentType type,
                                                   const OpponentContext& ctx) const;

  static OpponentModelSet uniform();
  // Point-mass models wrapping deterministic scripts (Random maps to uniform).
  static OpponentModelSet scripted(ScriptedKind ally_kind, ScriptedKind enemy_kind,
                                   GameConfig cfg);
  // Distilled networks evaluated noiselessly on encoded opponent features.
  static OpponentModelSet from_nets(DenseNet ally, DenseNet enemy, GameConfig cfg);

 private:
  std::array<Policy, kNumTypes> policies_;
};

// --- Filter operations ---

// Type persistence: the hidden type never transitions, so predict is identity.
Belief predict(const Belief& b);

// Condition on an observed opponent action taken from `ctx`:
//   b'(m) proportional to max(pi0_m(a | ctx), floor) * b(m).
Belief update_action(const Belief& b, const OpponentContext& ctx, OpponentAction action,
                     const OpponentModelSet& models);

// Condition on a probe reading with the probe's accuracy.
Belief update_probe(const Belief& b, AgentType reading, double accuracy);

// Expected protagonist reward for the tick under belief b (taken before the
// transition, i.e. the belief the action was chosen under).
double belief_reward(const Belief& b, const OutcomeFlags& flags, const GameConfig& cfg);

// --- Feature encodings ---

inline constexpr int kProtagonistInputDim = 7;   // belief-space protagonist
inline constexpr int kOpponentInputDim = 5;      // opponent learners and models
inline constexpr int kProtagonistRawDim = 12;    // recurrent baseline

// [x_p, y_p, x_o, y_o] / world_size, b(Enemy), probe_count / 10, step / max_steps
std::vector<double> encode_protagonist_input(const ProtagonistObs& obs, const Belief& b,
                                             const GameConfig& cfg);

// [x_p, y_p, x_o, y_o] / world_size, step / max_steps
std::vector<double> encode_opponent_input(const OpponentContext& ctx, const GameConfig& cfg);

// Raw observation features for the belief-free baseline: positions (4), last
// opponent action one-hot (4, zeros on the first tick), probe reading one-hot
// (2, zeros when absent), probe_count / 10, step / max_steps.
std::vector<double> encode_protagonist_raw(const ProtagonistObs& obs, const GameConfig& cfg);

}  // namespace aiig
