#include "aiig/tag_game.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aiig {

double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

const char* type_name(AgentType t) { return t == AgentType::Ally ? "ally" : "enemy"; }

AgentType other_type(AgentType t) {
  return t == AgentType::Ally ? AgentType::Enemy : AgentType::Ally;
}

const char* action_name(ProtagonistAction a) {
  switch (a) {
    case ProtagonistAction::MoveLeft: return "move_left";
    case ProtagonistAction::MoveRight: return "move_right";
    case ProtagonistAction::MoveUp: return "move_up";
    case ProtagonistAction::MoveDown: return "move_down";
    case ProtagonistAction::Tag: return "tag";
    case ProtagonistAction::Probe: return "probe";
  }
  return "?";
}

const char* action_name(OpponentAction a) {
  switch (a) {
    case OpponentAction::MoveLeft: return "move_left";
    case OpponentAction::MoveRight: return "move_right";
    case OpponentAction::MoveUp: return "move_up";
    case OpponentAction::MoveDown: return "move_down";
  }
  return "?";
}

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Running: return "running";
    case Outcome::Tagged: return "tagged";
    case Outcome::OpponentHome: return "opponent_home";
    case Outcome::Timeout: return "timeout";
  }
  return "?";
}

void GameConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("GameConfig: " + msg); };
  if (world_size <= 0) fail("world_size must be positive");
  if (move_step <= 0) fail("move_step must be positive");
  if (tag_range <= 0) fail("tag_range must be positive");
  if (river_y_min < 0 || river_y_min > world_size) fail("river_y_min must lie in [0, world_size]");
  if (probe_accuracy <= 0.5 || probe_accuracy > 1.0)
    fail("probe_accuracy must lie in (0.5, 1.0]");
  if (probe_cost_rate < 0) fail("probe_cost_rate must be nonnegative");
  if (base_epsilon <= 0) fail("base_epsilon must be positive");
  if (max_steps <= 0) fail("max_steps must be positive");
  auto inside = [&](Vec2 p) {
    return p.x >= 0 && p.x <= world_size && p.y >= 0 && p.y <= world_size;
  };
  if (!inside(protagonist_start)) fail("protagonist_start outside the world square");
  if (!inside(ally_base)) fail("ally_base outside the world square");
  if (!inside(enemy_base)) fail("enemy_base outside the world square");
}

namespace {

Vec2 clamp_to_world(Vec2 p, const GameConfig& cfg) {
  return {std::clamp(p.x, 0.0, cfg.world_size), std::clamp(p.y, 0.0, cfg.world_size)};
}

Vec2 move_delta(int axis_action, double step)  // 0 L, 1 R, 2 U, 3 D
{
  switch (axis_action) {
    case 0: return {-step, 0};
    case 1: return {step, 0};
    case 2: return {0, step};
    case 3: return {0, -step};
  }
  return {0, 0};
}

ProtagonistObs make_protagonist_obs(const WorldState& s, std::optional<OpponentAction> a_o,
                                    std::optional<AgentType> probe_reading) {
  ProtagonistObs o;
  o.protagonist_pos = s.protagonist_pos;
  o.opponent_pos = s.opponent_pos;
  o.last_opponent_action = a_o;
  o.probe_reading = probe_reading;
  o.probe_count = s.probe_count;
  o.step = s.step;
  return o;
}

OpponentObs make_opponent_obs(const WorldState& s) {
  OpponentObs o;
  o.protagonist_pos = s.protagonist_pos;
  o.opponent_pos = s.opponent_pos;
  o.own_type = s.opponent_type;
  o.step = s.step;
  return o;
}

ResetResult make_reset(const GameConfig& cfg, AgentType type) {
  WorldState s;
  s.protagonist_pos = cfg.protagonist_start;
  s.opponent_pos = cfg.opponent_start();
  s.opponent_type = type;
  s.step = 0;
  s.probe_count = 0;
  s.done = false;
  s.outcome = Outcome::Running;
  return {s, make_protagonist_obs(s, std::nullopt, std::nullopt), make_opponent_obs(s)};
}

}  // namespace

ResetResult reset(const GameConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  const AgentType type =
      std::uniform_real_distribution<double>(0.0, 1.0)(rng) < 0.5 ? AgentType::Ally
                                                                  : AgentType::Enemy;
  return make_reset(cfg, type);
}

ResetResult reset(const GameConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return reset(cfg, rng);
}

ResetResult reset_with_type(const GameConfig& cfg, AgentType type) {
  cfg.validate();
  return make_reset(cfg, type);
}

double protagonist_reward_given_type(const OutcomeFlags& flags, AgentType hypothetical,
                                     const GameConfig& cfg) {
  double r = 0;
  if (flags.tag_attempted) {
    r -= cfg.tag_cost;
    if (flags.tag_succeeded) {
      r += hypothetical == AgentType::Enemy ? cfg.reward_tag_enemy : cfg.reward_tag_ally;
    }
  }
  if (flags.probed) r -= cfg.probe_cost_rate * flags.probe_count;
  r -= cfg.distance_cost_rate * std::pow(flags.dist_to_opponent, 0.4);
  return r;
}

double opponent_reward_from_distance(double dist_to_own_base, bool tagged, const GameConfig& cfg) {
  double r = -cfg.distance_cost_rate * std::pow(dist_to_own_base, 0.4);
  if (tagged) r += cfg.reward_tagged;
  return r;
}

StepResult step(const WorldState& state, ProtagonistAction a_p, OpponentAction a_o,
                const GameConfig& cfg, std::mt19937_64& rng) {
  if (state.done) throw std::logic_error("step() called on a finished episode");

  WorldState s = state;
  const Vec2 opponent_pre_move = s.opponent_pos;

  OutcomeFlags flags;
  std::optional<AgentType> probe_reading;

  // Resolve protagonist intent. Tag is checked against the opponent's pre-move
  // position and fails unconditionally when the opponent is inside the river band.
  if (a_p == ProtagonistAction::Tag) {
    flags.tag_attempted = true;
    const bool in_river = opponent_pre_move.y > cfg.river_y_min;
    const double d_pre = distance(s.protagonist_pos, opponent_pre_move);
    flags.tag_succeeded = !in_river && d_pre < cfg.tag_range;
  } else if (a_p == ProtagonistAction::Probe) {
    flags.probed = true;
    s.probe_count += 1;
    const bool truthful = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < cfg.probe_accuracy;
    probe_reading = truthful ? s.opponent_type : other_type(s.opponent_type);
  } else {
    s.protagonist_pos =
        clamp_to_world(s.protagonist_pos + move_delta(static_cast<int>(a_p), cfg.move_step), cfg);
  }

  // Opponent always moves (simultaneously; a successful tag still lets the
  // displacement happen, the episode just ends on this tick).
  s.opponent_pos =
      clamp_to_world(s.opponent_pos + move_delta(static_cast<int>(a_o), cfg.move_step), cfg);

  s.step += 1;
  flags.probe_count = s.probe_count;
  flags.dist_to_opponent = distance(s.protagonist_pos, s.opponent_pos);

  // Termination, in priority order.
  const double dist_to_base = distance(s.opponent_pos, cfg.base_of(s.opponent_type));
  if (flags.tag_succeeded) {
    s.done = true;
    s.outcome = Outcome::Tagged;
  } else if (dist_to_base <= cfg.base_epsilon) {
    s.done = true;
    s.outcome = Outcome::OpponentHome;
  } else if (s.step >= cfg.max_steps) {
    s.done = true;
    s.outcome = Outcome::Timeout;
  }

  StepResult out;
  out.state = s;
  out.protagonist_obs = make_protagonist_obs(s, a_o, probe_reading);
  out.opponent_obs = make_opponent_obs(s);
  out.flags = flags;
  out.protagonist_reward = protagonist_reward_given_type(flags, s.opponent_type, cfg);
  out.opponent_reward = opponent_reward_from_distance(dist_to_base, flags.tag_succeeded, cfg);
  out.done = s.done;
  return out;
}

// --- Scripted opponents ---

ScriptedKind scripted_kind_from_name(const std::string& name) {
  if (name == "rush") return ScriptedKind::Rush;
  if (name == "deceive") return ScriptedKind::Deceive;
  if (name == "random") return ScriptedKind::Random;
  throw std::invalid_argument("unknown scripted opponent: " + name +
                              " (expected rush, deceive, or random)");
}

const char* scripted_name(ScriptedKind k) {
  switch (k) {
    case ScriptedKind::Rush: return "rush";
    case ScriptedKind::Deceive: return "deceive";
    case ScriptedKind::Random: return "random";
  }
  return "?";
}

namespace {

// Step along the axis with the larger remaining gap; vertical wins ties.
OpponentAction greedy_move_toward(Vec2 from, Vec2 target) {
  const double dx = target.x - from.x;
  const double dy = target.y - from.y;
  if (std::abs(dy) >= std::abs(dx)) {
    return dy >= 0 ? OpponentAction::MoveUp : OpponentAction::MoveDown;
  }
  return dx >= 0 ? OpponentAction::MoveRight : OpponentAction::MoveLeft;
}

}  // namespace

OpponentAction scripted_opponent(ScriptedKind kind, const OpponentObs& obs, const GameConfig& cfg,
                                 std::mt19937_64& rng) {
  switch (kind) {
    case ScriptedKind::Rush:
      return greedy_move_toward(obs.opponent_pos, cfg.base_of(obs.own_type));
    case ScriptedKind::Deceive: {
      // Head for the ally base until safely across the river, then for home.
      const Vec2 target = obs.opponent_pos.y > cfg.river_y_min ? cfg.base_of(obs.own_type)
                                                               : cfg.ally_base;
      return greedy_move_toward(obs.opponent_pos, target);
    }
    case ScriptedKind::Random:
      return static_cast<OpponentAction>(std::uniform_int_distribution<int>(0, 3)(rng));
  }
  throw std::logic_error("unreachable scripted kind");
}

}  // namespace aiig
