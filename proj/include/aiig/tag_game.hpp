#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>

namespace aiig {

// --- Geometry ---

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }

double distance(Vec2 a, Vec2 b);

// --- Types and actions ---

enum class AgentType : int { Ally = 0, Enemy = 1 };
inline constexpr int kNumTypes = 2;

const char* type_name(AgentType t);
AgentType other_type(AgentType t);

enum class ProtagonistAction : int {
  MoveLeft = 0,
  MoveRight = 1,
  MoveUp = 2,
  MoveDown = 3,
  Tag = 4,
  Probe = 5,
};
inline constexpr int kNumProtagonistActions = 6;

enum class OpponentAction : int {
  MoveLeft = 0,
  MoveRight = 1,
  MoveUp = 2,
  MoveDown = 3,
};
inline constexpr int kNumOpponentActions = 4;

const char* action_name(ProtagonistAction a);
const char* action_name(OpponentAction a);

enum class Outcome { Running, Tagged, OpponentHome, Timeout };
const char* outcome_name(Outcome o);

// --- Configuration ---

struct GameConfig {
  double world_size = 8.0;
  double move_step = 1.0;
  double tag_range = 2.5;
  double river_y_min = 6.0;   // river band is y in (river_y_min, world_size]
  double probe_accuracy = 0.8;
  double probe_cost_rate = 0.25;  // cost of the n-th probe is rate * n
  double tag_cost = 0.2;
  double reward_tag_enemy = 10.0;
  double reward_tag_ally = -20.0;
  double reward_tagged = -10.0;   // opponent's penalty when tagged
  double distance_cost_rate = 0.25;  // r_d2o = -rate * d^(2/5)
  double base_epsilon = 0.5;      // opponent "home" when within this of its base
  int max_steps = 60;
  Vec2 protagonist_start {4.0, 4.0};
  Vec2 ally_base {1.0, 7.5};
  Vec2 enemy_base {7.0, 7.5};

  Vec2 base_of(AgentType t) const { return t == AgentType::Ally ? ally_base : enemy_base; }
  Vec2 opponent_start() const { return {world_size / 2.0, 0.0}; }

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// --- State and observations ---

struct WorldState {
  Vec2 protagonist_pos;
  Vec2 opponent_pos;
  AgentType opponent_type = AgentType::Ally;
  int step = 0;
  int probe_count = 0;
  bool done = false;
  Outcome outcome = Outcome::Running;
};

// What the protagonist sees after a tick: full physical state, the opponent's
// executed action, and a probe reading when it probed this tick. Never the type.
struct ProtagonistObs {
  Vec2 protagonist_pos;
  Vec2 opponent_pos;
  std::optional<OpponentAction> last_opponent_action;
  std::optional<AgentType> probe_reading;
  int probe_count = 0;
  int step = 0;
};

// What the opponent sees: everything including its own type.
struct OpponentObs {
  Vec2 protagonist_pos;
  Vec2 opponent_pos;
  AgentType own_type = AgentType::Ally;
  int step = 0;
};

// Per-tick event summary, sufficient to recompute the protagonist reward under
// any hypothetical opponent type (the belief engine depends on this).
struct OutcomeFlags {
  bool tag_attempted = false;
  bool tag_succeeded = false;
  bool probed = false;
  int probe_count = 0;          // inclusive of this tick's probe
  double dist_to_opponent = 0;  // post-move distance
};

struct ResetResult {
  WorldState state;
  ProtagonistObs protagonist_obs;
  OpponentObs opponent_obs;
};

struct StepResult {
  WorldState state;
  ProtagonistObs protagonist_obs;
  OpponentObs opponent_obs;
  double protagonist_reward = 0;
  double opponent_reward = 0;
  OutcomeFlags flags;
  bool done = false;
};

// --- Environment API ---

ResetResult reset(const GameConfig& cfg, std::mt19937_64& rng);
ResetResult reset(const GameConfig& cfg, std::uint64_t seed);
// Deterministic reset with a chosen hidden type (evaluation and tests).
ResetResult reset_with_type(const GameConfig& cfg, AgentType type);

// Simultaneous move; tag resolves against the opponent's pre-move position.
// Throws std::logic_error when called on a finished state.
StepResult step(const WorldState& state, ProtagonistAction a_p, OpponentAction a_o,
                const GameConfig& cfg, std::mt19937_64& rng);

// Protagonist reward for the tick summarized by `flags` if the opponent were of
// `hypothetical` type. With the true type this equals StepResult::protagonist_reward.
double protagonist_reward_given_type(const OutcomeFlags& flags, AgentType hypothetical,
                                     const GameConfig& cfg);

double opponent_reward_from_distance(double dist_to_own_base, bool tagged, const GameConfig& cfg);

// --- Scripted opponents ---

enum class ScriptedKind { Rush, Deceive, Random };
ScriptedKind scripted_kind_from_name(const std::string& name);
const char* scripted_name(ScriptedKind k);

OpponentAction scripted_opponent(ScriptedKind kind, const OpponentObs& obs,
                                 const GameConfig& cfg, std::mt19937_64& rng);

}  // namespace aiig
