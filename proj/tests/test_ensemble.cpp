#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "aiig/ensemble.hpp"

using namespace aiig;

namespace {

EnsembleConfig tiny_ensemble() {
  EnsembleConfig e;
  e.gammas = {0.9, 0.99};
  e.episodes_per_epoch = 4;
  e.grad_steps_per_epoch = 4;
  e.evo_population = 2;
  e.evo_episodes = 1;
  e.buffer_capacity = 20000;
  return e;
}

LearnerConfig tiny_learner() {
  LearnerConfig l;
  l.batch_size = 16;
  return l;
}

}  // namespace

TEST_CASE("population construction assigns ids and validates gammas") {
  GameConfig env;
  std::mt19937_64 rng(1);
  const Population pop = make_population({0.9, 0.99, 0.997}, env, rng);
  REQUIRE(pop.k() == 3);
  CHECK(pop.active[0].member_id == 0);
  CHECK(pop.active[2].member_id == 2);
  CHECK(pop.active[1].gamma == doctest::Approx(0.99));
  CHECK(pop.find_active(2) != nullptr);
  CHECK(pop.find_active(7) == nullptr);
  CHECK(pop.active[0].ac[0].obs_dim() == kOpponentInputDim);
  CHECK(pop.active[0].ac[1].n_actions() == kNumOpponentActions);

  CHECK_THROWS_AS(make_population({1.0}, env, rng), std::invalid_argument);
  CHECK_THROWS_AS(make_population({}, env, rng), std::invalid_argument);
}

TEST_CASE("running average follows the EMA recurrence") {
  GameConfig env;
  std::mt19937_64 rng(2);
  EnsembleMember m = EnsembleMember::make(0, 0.99, env, rng);
  CHECK_FALSE(m.has_stats);
  m.record_episode_return(10.0, 0.2);
  CHECK(m.has_stats);
  CHECK(m.running_avg == doctest::Approx(10.0));  // first sample seeds the average
  m.record_episode_return(0.0, 0.2);
  CHECK(m.running_avg == doctest::Approx(0.8 * 10.0));
  m.record_episode_return(5.0, 0.2);
  CHECK(m.running_avg == doctest::Approx(0.8 * 8.0 + 0.2 * 5.0));
  CHECK(m.episodes_played == 3);
}

TEST_CASE("self-play epoch stores both sides' experience and trains the sampled members") {
  GameConfig env;
  env.max_steps = 20;
  std::mt19937_64 rng(3);
  const EnsembleConfig ecfg = tiny_ensemble();
  const LearnerConfig lcfg = tiny_learner();

  Population pop = make_population(ecfg.gammas, env, rng);
  SharedReplay shared(ecfg.buffer_capacity);
  BeliefProtagonistLearner prot(env, lcfg, rng);
  const OpponentModelSet models = OpponentModelSet::uniform();

  const EpochReport rep = self_play_epoch(prot, pop, shared, env, ecfg, lcfg, models, rng);
  CHECK(rep.episodes == 4);
  CHECK(shared.protagonist.size() > 0);
  CHECK(shared.opponent_size() > 0);
  CHECK(rep.protagonist_grad_steps == 4);
  // Every sampled member trained G steps; every episode hit exactly one member.
  int episode_sum = 0;
  for (const auto& [id, n] : rep.member_episode_count) {
    CHECK(pop.find_active(id) != nullptr);
    episode_sum += n;
  }
  CHECK(episode_sum == 4);
  CHECK(rep.member_grad_steps ==
        ecfg.grad_steps_per_epoch * static_cast<int>(rep.member_episode_count.size()));
  // Sampled members carry stats now.
  for (const auto& [id, n] : rep.member_episode_count) {
    (void)n;
    CHECK(pop.find_active(id)->has_stats);
  }

  // Transitions carry honest tags.
  bool saw_opponent = false;
  for (std::size_t i = 0; i < shared.opponent[0].size(); ++i) {
    const auto& t = shared.opponent[0].at(i);
    CHECK(t.tag.role == Role::Opponent);
    CHECK(t.tag.type == AgentType::Ally);
    CHECK(t.tag.member_id >= 0);
    saw_opponent = true;
  }
  for (std::size_t i = 0; i < shared.protagonist.size(); ++i) {
    CHECK(shared.protagonist.at(i).tag.role == Role::Protagonist);
  }
  (void)saw_opponent;
}

TEST_CASE("a lone member is drawn without consuming entropy for the choice") {
  // K = 1 exercises the variant path where member sampling is skipped.
  GameConfig env;
  env.max_steps = 10;
  std::mt19937_64 rng(4);
  EnsembleConfig ecfg = tiny_ensemble();
  ecfg.gammas = {0.99};
  const LearnerConfig lcfg = tiny_learner();
  Population pop = make_population(ecfg.gammas, env, rng);
  SharedReplay shared(ecfg.buffer_capacity);
  BeliefProtagonistLearner prot(env, lcfg, rng);
  const EpochReport rep =
      self_play_epoch(prot, pop, shared, env, ecfg, lcfg, OpponentModelSet::uniform(), rng);
  CHECK(rep.member_episode_count.at(0) == 4);
}

TEST_CASE("evolution only replaces a parent when the mutant clearly beats its average") {
  GameConfig env;
  env.max_steps = 10;
  std::mt19937_64 rng(5);
  EnsembleConfig ecfg = tiny_ensemble();
  ecfg.gammas = {0.99};
  ecfg.evo_population = 3;
  const LearnerConfig lcfg = tiny_learner();

  Population pop = make_population(ecfg.gammas, env, rng);
  SharedReplay shared(ecfg.buffer_capacity);
  BeliefProtagonistLearner prot(env, lcfg, rng);
  const OpponentModelSet models = OpponentModelSet::uniform();

  SUBCASE("parent without stats never gets replaced") {
    REQUIRE_FALSE(pop.active[0].has_stats);
    const EvolutionReport rep =
        evolution_step(pop, prot, shared, env, ecfg, lcfg, models, rng);
    CHECK(rep.mutants == 3);
    CHECK(rep.replaced_member_ids.empty());
    CHECK(rep.transitions_added > 0);
    CHECK(shared.opponent_size() == rep.transitions_added);
    // Mutant experience is marked as such.
    bool saw_mutant = false;
    for (int ty = 0; ty < kNumTypes; ++ty) {
      for (std::size_t i = 0; i < shared.opponent[ty].size(); ++i) {
        CHECK(shared.opponent[ty].at(i).tag.source == TransitionSource::Mutant);
        saw_mutant = true;
      }
    }
    CHECK(saw_mutant);
  }

  SUBCASE("a hopeless parent average forces replacement; a lofty one forbids it") {
    pop.active[0].has_stats = true;
    pop.active[0].running_avg = -1e9;
    const std::vector<double> parent_actor = pop.active[0].ac[0].actor.params;
    EvolutionReport rep = evolution_step(pop, prot, shared, env, ecfg, lcfg, models, rng);
    // The first mutant always clears a -1e9 bar; each acceptance raises the
    // bar to the accepted mutant's level, so later ones may well fall short.
    REQUIRE_FALSE(rep.replaced_member_ids.empty());
    for (int id : rep.replaced_member_ids) CHECK(id == 0);
    CHECK(pop.active[0].ac[0].actor.params != parent_actor);
    // The surviving average is one of the measured mutant averages and sits
    // within the margin of the best one.
    const double best = *std::max_element(rep.mutant_avg_returns.begin(),
                                          rep.mutant_avg_returns.end());
    CHECK(pop.active[0].running_avg > -1e9);
    CHECK(pop.active[0].running_avg >= best - ecfg.evo_margin);
    bool is_measured = false;
    for (double r : rep.mutant_avg_returns) {
      if (r == pop.active[0].running_avg) is_measured = true;
    }
    CHECK(is_measured);

    pop.active[0].running_avg = 1e9;
    const std::vector<double> now = pop.active[0].ac[0].actor.params;
    rep = evolution_step(pop, prot, shared, env, ecfg, lcfg, models, rng);
    CHECK(rep.replaced_member_ids.empty());
    CHECK(pop.active[0].ac[0].actor.params == now);
  }

  SUBCASE("the acceptance margin blocks mutants that merely match the parent") {
    pop.active[0].has_stats = true;
    pop.active[0].running_avg = 0.0;
    // Opponent returns are never positive (distance shaping only), so a zero
    // average plus margin 0.5 is unbeatable by any real mutant.
    const EvolutionReport rep =
        evolution_step(pop, prot, shared, env, ecfg, lcfg, models, rng);
    for (double r : rep.mutant_avg_returns) CHECK(r <= 0.0);
    CHECK(rep.replaced_member_ids.empty());
  }
}

TEST_CASE("distillation trigger respects the per-type sample floor") {
  GameConfig env;
  std::mt19937_64 rng(6);
  EnsembleConfig ecfg = tiny_ensemble();
  ecfg.distill.min_samples = 50;
  ecfg.distill.steps = 100;
  ecfg.distill.hidden = {8};
  SharedReplay shared(1000);

  CHECK_FALSE(try_distill_models(shared, ecfg.distill, env, rng).has_value());

  auto fill = [&](AgentType ty, int n) {
    for (int i = 0; i < n; ++i) {
      Transition t;
      t.input = std::vector<double>(kOpponentInputDim, 0.5);
      t.action_probs = {0.25, 0.25, 0.25, 0.25};
      t.tag.role = Role::Opponent;
      t.tag.type = ty;
      shared.opponent_buffer(ty).append(std::move(t));
    }
  };
  fill(AgentType::Ally, 60);
  CHECK_FALSE(try_distill_models(shared, ecfg.distill, env, rng).has_value());  // enemy short
  fill(AgentType::Enemy, 60);
  std::array<DistillResult, kNumTypes> results;
  const auto models = try_distill_models(shared, ecfg.distill, env, rng, &results);
  REQUIRE(models.has_value());
  CHECK(results[0].n_train + results[0].n_holdout == 60);
  OpponentContext ctx;
  ctx.protagonist_pos = {4, 4};
  ctx.opponent_pos = {4, 0};
  const auto p = models->evaluate(AgentType::Enemy, ctx);
  double s = 0;
  for (double v : p) s += v;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("recurrent protagonist learner runs the same epoch loop") {
  GameConfig env;
  env.max_steps = 10;
  std::mt19937_64 rng(7);
  EnsembleConfig ecfg = tiny_ensemble();
  ecfg.gammas = {0.99};
  LearnerConfig lcfg = tiny_learner();
  RecurrentLearnerConfig rcfg;
  rcfg.hidden_size = 8;
  rcfg.batch_episodes = 2;
  rcfg.min_episodes = 2;

  Population pop = make_population(ecfg.gammas, env, rng);
  SharedReplay shared(ecfg.buffer_capacity);
  RecurrentProtagonistLearner prot(lcfg, rcfg, rng);
  CHECK(prot.mode() == PolicyMode::Recurrent);
  const EpochReport rep =
      self_play_epoch(prot, pop, shared, env, ecfg, lcfg, OpponentModelSet::uniform(), rng);
  CHECK(rep.episodes == 4);
  // Episode storage lives inside the learner, not the shared flat buffer.
  CHECK(shared.protagonist.size() == 0);
  CHECK(shared.opponent_size() > 0);
}
