#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "aiig/tag_game.hpp"

using namespace aiig;

namespace {

StepResult step_from(WorldState s, ProtagonistAction a_p, OpponentAction a_o,
                     const GameConfig& cfg, std::uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  return step(s, a_p, a_o, cfg, rng);
}

WorldState state_at(Vec2 prot, Vec2 opp, AgentType type, int step = 0, int probes = 0) {
  WorldState s;
  s.protagonist_pos = prot;
  s.opponent_pos = opp;
  s.opponent_type = type;
  s.step = step;
  s.probe_count = probes;
  return s;
}

// The protagonist pays distance shaping on the post-move separation every step.
double d2o(const StepResult& r, const GameConfig& cfg) {
  const double d = std::hypot(r.state.protagonist_pos.x - r.state.opponent_pos.x,
                              r.state.protagonist_pos.y - r.state.opponent_pos.y);
  return -cfg.distance_cost_rate * std::pow(d, 0.4);
}

}  // namespace

TEST_CASE("reset places both agents at the documented starts") {
  GameConfig cfg;
  const ResetResult r = reset_with_type(cfg, AgentType::Enemy);
  CHECK(r.state.protagonist_pos == Vec2{4.0, 4.0});
  CHECK(r.state.opponent_pos == Vec2{4.0, 0.0});
  CHECK(r.state.opponent_type == AgentType::Enemy);
  CHECK(r.state.step == 0);
  CHECK_FALSE(r.state.done);
  CHECK_FALSE(r.protagonist_obs.last_opponent_action.has_value());
  CHECK_FALSE(r.protagonist_obs.probe_reading.has_value());
  CHECK(r.opponent_obs.own_type == AgentType::Enemy);
}

TEST_CASE("hidden type is a fair coin over seeds") {
  GameConfig cfg;
  int enemies = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    if (reset(cfg, static_cast<std::uint64_t>(i)).state.opponent_type == AgentType::Enemy) {
      enemies += 1;
    }
  }
  const double frac = static_cast<double>(enemies) / n;
  CHECK(frac > 0.48);
  CHECK(frac < 0.52);
}

TEST_CASE("movement is axis-aligned unit steps, clamped to the world") {
  GameConfig cfg;
  const auto s = state_at({4, 4}, {4, 0}, AgentType::Ally);

  auto r = step_from(s, ProtagonistAction::MoveUp, OpponentAction::MoveRight, cfg);
  CHECK(r.state.protagonist_pos == Vec2{4.0, 5.0});
  CHECK(r.state.opponent_pos == Vec2{5.0, 0.0});
  CHECK(r.protagonist_obs.last_opponent_action == OpponentAction::MoveRight);

  // Clamping at the boundary.
  const auto edge = state_at({0, 8}, {8, 0}, AgentType::Ally);
  r = step_from(edge, ProtagonistAction::MoveLeft, OpponentAction::MoveRight, cfg);
  CHECK(r.state.protagonist_pos == Vec2{0.0, 8.0});
  CHECK(r.state.opponent_pos == Vec2{8.0, 0.0});
  r = step_from(edge, ProtagonistAction::MoveUp, OpponentAction::MoveDown, cfg);
  CHECK(r.state.protagonist_pos == Vec2{0.0, 8.0});
  CHECK(r.state.opponent_pos == Vec2{8.0, 0.0});
}

TEST_CASE("tag resolves against the pre-move opponent position") {
  GameConfig cfg;
  // Opponent is in range before its move and would be out of range after it.
  const auto s = state_at({4, 4}, {4, 6}, AgentType::Enemy);
  const auto r = step_from(s, ProtagonistAction::Tag, OpponentAction::MoveUp, cfg);
  CHECK(r.flags.tag_attempted);
  CHECK(r.flags.tag_succeeded);
  CHECK(r.state.outcome == Outcome::Tagged);
  CHECK(r.done);
  // +10 for an enemy, -0.2 tag cost, plus the usual distance shaping.
  CHECK(r.protagonist_reward == doctest::Approx(10.0 - 0.2 + d2o(r, cfg)));
}

TEST_CASE("tag at distance 2.6 misses and only costs the attempt") {
  GameConfig cfg;
  const auto s = state_at({4, 4}, {4 + 2.6, 4}, AgentType::Enemy);
  const auto r = step_from(s, ProtagonistAction::Tag, OpponentAction::MoveUp, cfg);
  CHECK(r.flags.tag_attempted);
  CHECK_FALSE(r.flags.tag_succeeded);
  CHECK(r.state.outcome != Outcome::Tagged);
  CHECK(r.protagonist_reward == doctest::Approx(-0.2 + d2o(r, cfg)));
}

TEST_CASE("tagging an ally is heavily penalized") {
  GameConfig cfg;
  const auto s = state_at({4, 4}, {4, 5}, AgentType::Ally);
  const auto r = step_from(s, ProtagonistAction::Tag, OpponentAction::MoveUp, cfg);
  CHECK(r.flags.tag_succeeded);
  CHECK(r.protagonist_reward == doctest::Approx(-20.0 - 0.2 + d2o(r, cfg)));
  CHECK(r.opponent_reward < -9.0);  // tagged penalty dominates
}

TEST_CASE("the river shields the opponent from tags") {
  GameConfig cfg;
  // Pre-move y = 6.5 > 6: within range but protected.
  const auto s = state_at({4, 6}, {4, 6.5}, AgentType::Enemy);
  const auto r = step_from(s, ProtagonistAction::Tag, OpponentAction::MoveDown, cfg);
  CHECK(r.flags.tag_attempted);
  CHECK_FALSE(r.flags.tag_succeeded);
  CHECK(r.protagonist_reward == doctest::Approx(-0.2 + d2o(r, cfg)));

  // Exactly on the bank (y = 6.0) is not in the river: tag succeeds.
  const auto bank = state_at({4, 6}, {4, 6.0}, AgentType::Enemy);
  const auto rb = step_from(bank, ProtagonistAction::Tag, OpponentAction::MoveUp, cfg);
  CHECK(rb.flags.tag_succeeded);
}

TEST_CASE("opponent distance shaping matches the closed form") {
  GameConfig cfg;
  // d = 32 gives -0.25 * 32^0.4 = -1.0 exactly.
  CHECK(opponent_reward_from_distance(32.0, false, cfg) == doctest::Approx(-1.0));
  CHECK(opponent_reward_from_distance(1.0, true, cfg) == doctest::Approx(-10.25));
  CHECK(opponent_reward_from_distance(0.0, false, cfg) == doctest::Approx(0.0));
}

TEST_CASE("probe costs scale with the running count") {
  GameConfig cfg;
  const auto s0 = state_at({0, 0}, {8, 8}, AgentType::Enemy);
  const auto r1 = step_from(s0, ProtagonistAction::Probe, OpponentAction::MoveUp, cfg);
  CHECK(r1.flags.probed);
  CHECK(r1.flags.probe_count == 1);
  CHECK(r1.protagonist_reward == doctest::Approx(-0.25 + d2o(r1, cfg)));
  CHECK(r1.protagonist_obs.probe_reading.has_value());

  auto s1 = r1.state;
  s1.done = false;  // still running here anyway
  const auto r2 = step_from(s1, ProtagonistAction::Probe, OpponentAction::MoveUp, cfg);
  CHECK(r2.flags.probe_count == 2);
  CHECK(r2.protagonist_reward == doctest::Approx(-0.5 + d2o(r2, cfg)));
}

TEST_CASE("probe readings are truthful at the configured accuracy") {
  GameConfig cfg;
  std::mt19937_64 rng(3);
  const auto s = state_at({0, 0}, {8, 8}, AgentType::Enemy);
  int truthful = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto r = step(s, ProtagonistAction::Probe, OpponentAction::MoveUp, cfg, rng);
    REQUIRE(r.protagonist_obs.probe_reading.has_value());
    if (*r.protagonist_obs.probe_reading == AgentType::Enemy) truthful += 1;
  }
  const double frac = static_cast<double>(truthful) / n;
  CHECK(frac > 0.78);
  CHECK(frac < 0.82);
}

TEST_CASE("opponent reaching its base ends the episode") {
  GameConfig cfg;
  // One step below the enemy base; moving up lands within base_epsilon.
  const auto s = state_at({0, 0}, {7.0, 6.6}, AgentType::Enemy);
  const auto r = step_from(s, ProtagonistAction::MoveLeft, OpponentAction::MoveUp, cfg);
  CHECK(r.state.outcome == Outcome::OpponentHome);
  CHECK(r.done);
}

TEST_CASE("tag outranks home arrival, which outranks timeout") {
  GameConfig cfg;
  cfg.max_steps = 1;
  // Opponent starts adjacent to its base and in tag range; all three
  // terminations fire on the same tick.
  const auto s = state_at({7.0, 6.0}, {7.0, 6.0}, AgentType::Enemy, /*step=*/0);
  const auto r = step_from(s, ProtagonistAction::Tag, OpponentAction::MoveUp, cfg);
  CHECK(r.state.outcome == Outcome::Tagged);

  // Without the tag, home beats timeout.
  const auto r2 = step_from(s, ProtagonistAction::MoveLeft, OpponentAction::MoveUp, cfg);
  CHECK(r2.state.outcome == Outcome::OpponentHome);

  // Without either, the step cap fires.
  const auto far = state_at({0.0, 0.0}, {8.0, 0.0}, AgentType::Enemy, /*step=*/0);
  const auto r3 = step_from(far, ProtagonistAction::MoveLeft, OpponentAction::MoveDown, cfg);
  CHECK(r3.state.outcome == Outcome::Timeout);
  CHECK(r3.done);
}

TEST_CASE("stepping a finished state throws") {
  GameConfig cfg;
  auto s = state_at({4, 4}, {4, 5}, AgentType::Ally);
  s.done = true;
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(step(s, ProtagonistAction::MoveUp, OpponentAction::MoveUp, cfg, rng),
                  std::logic_error);
}

TEST_CASE("emitted reward equals the hypothetical-reward helper at the true type") {
  GameConfig cfg;
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> pa(0, kNumProtagonistActions - 1);
  std::uniform_int_distribution<int> oa(0, kNumOpponentActions - 1);
  for (int ep = 0; ep < 200; ++ep) {
    auto r = reset(cfg, rng);
    WorldState s = r.state;
    while (!s.done) {
      const auto res = step(s, static_cast<ProtagonistAction>(pa(rng)),
                            static_cast<OpponentAction>(oa(rng)), cfg, rng);
      const double recomputed =
          protagonist_reward_given_type(res.flags, s.opponent_type, cfg);
      REQUIRE(res.protagonist_reward == doctest::Approx(recomputed).epsilon(1e-12));
      s = res.state;
    }
  }
}

TEST_CASE("positions stay inside the world under random play") {
  GameConfig cfg;
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> pa(0, kNumProtagonistActions - 1);
  std::uniform_int_distribution<int> oa(0, kNumOpponentActions - 1);
  long ticks = 0;
  while (ticks < 100000) {
    auto r = reset(cfg, rng);
    WorldState s = r.state;
    while (!s.done) {
      const auto res = step(s, static_cast<ProtagonistAction>(pa(rng)),
                            static_cast<OpponentAction>(oa(rng)), cfg, rng);
      s = res.state;
      ticks += 1;
      REQUIRE(s.protagonist_pos.x >= 0.0);
      REQUIRE(s.protagonist_pos.x <= cfg.world_size);
      REQUIRE(s.protagonist_pos.y >= 0.0);
      REQUIRE(s.protagonist_pos.y <= cfg.world_size);
      REQUIRE(s.opponent_pos.x >= 0.0);
      REQUIRE(s.opponent_pos.x <= cfg.world_size);
      REQUIRE(s.opponent_pos.y >= 0.0);
      REQUIRE(s.opponent_pos.y <= cfg.world_size);
      REQUIRE(s.step <= cfg.max_steps);
    }
  }
}

TEST_CASE("rush opponent moves greedily toward its own base") {
  GameConfig cfg;
  std::mt19937_64 rng(1);
  OpponentObs obs;
  obs.opponent_pos = {4, 0};
  obs.own_type = AgentType::Enemy;
  // |dy| = 7.5 >= |dx| = 3: vertical first.
  CHECK(scripted_opponent(ScriptedKind::Rush, obs, cfg, rng) == OpponentAction::MoveUp);
  obs.opponent_pos = {4, 7.5};  // dy = 0, dx = 3
  CHECK(scripted_opponent(ScriptedKind::Rush, obs, cfg, rng) == OpponentAction::MoveRight);
  obs.own_type = AgentType::Ally;
  obs.opponent_pos = {4, 7.5};  // ally base is at x = 1
  CHECK(scripted_opponent(ScriptedKind::Rush, obs, cfg, rng) == OpponentAction::MoveLeft);
}

TEST_CASE("deceive opponent feints toward the ally base until past the river line") {
  GameConfig cfg;
  std::mt19937_64 rng(1);
  OpponentObs obs;
  obs.own_type = AgentType::Enemy;
  obs.opponent_pos = {4, 3};  // below the river: heads for the ally base (left/up)
  const auto below = scripted_opponent(ScriptedKind::Deceive, obs, cfg, rng);
  CHECK((below == OpponentAction::MoveLeft || below == OpponentAction::MoveUp));
  obs.opponent_pos = {4, 6.5};  // past the river line: heads home (right/up)
  const auto above = scripted_opponent(ScriptedKind::Deceive, obs, cfg, rng);
  CHECK((above == OpponentAction::MoveRight || above == OpponentAction::MoveUp));
}

TEST_CASE("random opponent covers all four moves") {
  GameConfig cfg;
  std::mt19937_64 rng(9);
  OpponentObs obs;
  obs.opponent_pos = {4, 4};
  std::array<int, 4> counts{};
  for (int i = 0; i < 4000; ++i) {
    counts[static_cast<int>(scripted_opponent(ScriptedKind::Random, obs, cfg, rng))] += 1;
  }
  for (int c : counts) CHECK(c > 800);
}

TEST_CASE("config validation names the bad field") {
  GameConfig cfg;
  cfg.tag_range = -1.0;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("tag_range"), std::invalid_argument);
  cfg = {};
  cfg.max_steps = 0;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("max_steps"), std::invalid_argument);
  cfg = {};
  cfg.probe_accuracy = 0.4;  // must beat a coin flip
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("probe_accuracy"),
                       std::invalid_argument);
}
