#include "aiig/ensemble.hpp"

#include <algorithm>
#include <stdexcept>

namespace aiig {

// --- Protagonist learners ---

BeliefProtagonistLearner::BeliefProtagonistLearner(const GameConfig& env, LearnerConfig cfg,
                                                   std::mt19937_64& init_rng)
    : cfg_(cfg), ac_(ActorCritic::make(kProtagonistInputDim, kNumProtagonistActions, init_rng)) {
  (void)env;
}

BeliefProtagonistLearner::BeliefProtagonistLearner(LearnerConfig cfg, ActorCritic ac)
    : cfg_(cfg), ac_(std::move(ac)) {}

std::unique_ptr<ProtagonistPolicy> BeliefProtagonistLearner::make_policy(bool explore) const {
  return std::make_unique<LearnedProtagonist>(&ac_, &cfg_, explore);
}

void BeliefProtagonistLearner::observe_episode(const EpisodeResult& ep, SharedReplay& shared) {
  for (const Transition& t : ep.protagonist_transitions) shared.protagonist.append(t);
}

TrainReport BeliefProtagonistLearner::train(SharedReplay& shared, std::mt19937_64& rng) {
  return train_step(ac_, shared.protagonist, cfg_, step_index_++, rng);
}

void BeliefProtagonistLearner::add_to_checkpoint(Checkpoint& ckpt) const {
  ckpt.meta["protagonist_mode"] = "belief";
  ckpt.add_dense("actor", ac_.actor);
  ckpt.add_dense("q1", ac_.q1);
  ckpt.add_dense("q2", ac_.q2);
  ckpt.add_dense("target_actor", ac_.target_actor);
  ckpt.add_dense("target_q1", ac_.target_q1);
  ckpt.add_dense("target_q2", ac_.target_q2);
}

RecurrentProtagonistLearner::RecurrentProtagonistLearner(LearnerConfig cfg,
                                                         RecurrentLearnerConfig rcfg,
                                                         std::mt19937_64& init_rng)
    : cfg_(cfg),
      rcfg_(rcfg),
      rl_(RecurrentLearner::make(kProtagonistRawDim, kNumProtagonistActions, rcfg, init_rng)),
      episodes_(rcfg.episode_capacity) {}

RecurrentProtagonistLearner::RecurrentProtagonistLearner(LearnerConfig cfg,
                                                         RecurrentLearnerConfig rcfg,
                                                         RecurrentLearner rl)
    : cfg_(cfg), rcfg_(rcfg), rl_(std::move(rl)), episodes_(rcfg.episode_capacity) {}

std::unique_ptr<ProtagonistPolicy> RecurrentProtagonistLearner::make_policy(bool explore) const {
  return std::make_unique<RecurrentProtagonist>(&rl_.actor, &cfg_, explore);
}

void RecurrentProtagonistLearner::observe_episode(const EpisodeResult& ep, SharedReplay&) {
  episodes_.append(ep.protagonist_transitions);
}

TrainReport RecurrentProtagonistLearner::train(SharedReplay&, std::mt19937_64& rng) {
  return rl_.train_step(episodes_, cfg_, rcfg_, step_index_++, rng);
}

void RecurrentProtagonistLearner::add_to_checkpoint(Checkpoint& ckpt) const {
  ckpt.meta["protagonist_mode"] = "recurrent";
  ckpt.add_recurrent("actor", rl_.actor);
  ckpt.add_recurrent("target_actor", rl_.target_actor);
  ckpt.add_dense("q1", rl_.q1);
  ckpt.add_dense("q2", rl_.q2);
  ckpt.add_dense("target_q1", rl_.target_q1);
  ckpt.add_dense("target_q2", rl_.target_q2);
}

// --- Ensemble members ---

EnsembleMember EnsembleMember::make(int id, double gamma, const GameConfig& env,
                                    std::mt19937_64& rng) {
  (void)env;
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("member gamma must lie in (0, 1)");
  }
  EnsembleMember m;
  m.member_id = id;
  m.gamma = gamma;
  m.ac[0] = ActorCritic::make(kOpponentInputDim, kNumOpponentActions, rng);
  m.ac[1] = ActorCritic::make(kOpponentInputDim, kNumOpponentActions, rng);
  return m;
}

void EnsembleMember::record_episode_return(double r, double alpha) {
  running_avg = has_stats ? (1.0 - alpha) * running_avg + alpha * r : r;
  has_stats = true;
  episodes_played += 1;
}

const EnsembleMember* Population::find_active(int member_id) const {
  for (const auto& m : active) {
    if (m.member_id == member_id) return &m;
  }
  return nullptr;
}

Population make_population(const std::vector<double>& gammas, const GameConfig& env,
                           std::mt19937_64& rng) {
  if (gammas.empty()) throw std::invalid_argument("population needs at least one gamma");
  Population pop;
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    pop.active.push_back(EnsembleMember::make(static_cast<int>(i), gammas[i], env, rng));
  }
  return pop;
}

void member_train_step(EnsembleMember& m, SharedReplay& shared, const LearnerConfig& base_cfg,
                       std::mt19937_64& rng) {
  LearnerConfig cfg = base_cfg;
  cfg.gamma = m.gamma;
  for (int t = 0; t < kNumTypes; ++t) {
    const ReplayBuffer& buf = shared.opponent[t];
    if (buf.size() < cfg.batch_size) continue;
    train_step(m.ac[t], buf, cfg, m.train_steps[t], rng);
    m.train_steps[t] += 1;
  }
}

EpochReport self_play_epoch(ProtagonistLearnerIface& prot, Population& pop, SharedReplay& shared,
                            const GameConfig& env, const EnsembleConfig& ecfg,
                            const LearnerConfig& lcfg, const OpponentModelSet& models,
                            std::mt19937_64& rng) {
  if (pop.active.empty()) throw std::logic_error("self_play_epoch: empty population");
  EpochReport report;
  std::set<std::size_t> sampled;
  double state_sum = 0, stored_sum = 0;

  for (int e = 0; e < ecfg.episodes_per_epoch; ++e) {
    const std::size_t k_idx =
        pop.active.size() > 1
            ? std::uniform_int_distribution<std::size_t>(0, pop.active.size() - 1)(rng)
            : 0;
    EnsembleMember& member = pop.active[k_idx];
    sampled.insert(k_idx);

    LearnedOpponent opp(&member.ac[0], &member.ac[1], &env, &lcfg, /*explore=*/true);
    auto policy = prot.make_policy(/*explore=*/true);
    EpisodeOptions opts;
    opts.opponent_member_id = member.member_id;
    EpisodeResult ep = run_episode(env, *policy, opp, models, prot.mode(), rng, opts);

    for (const Transition& t : ep.opponent_transitions) {
      shared.opponent_buffer(ep.opponent_type).append(t);
    }
    prot.observe_episode(ep, shared);
    member.record_episode_return(ep.opponent_return, ecfg.ema_alpha);

    report.episodes += 1;
    state_sum += ep.protagonist_state_return;
    stored_sum += ep.protagonist_stored_return;
    report.member_return_mean[member.member_id] += ep.opponent_return;
    report.member_episode_count[member.member_id] += 1;
  }
  if (report.episodes > 0) {
    report.protagonist_state_return_mean = state_sum / report.episodes;
    report.protagonist_stored_return_mean = stored_sum / report.episodes;
  }
  for (auto& [id, sum] : report.member_return_mean) sum /= report.member_episode_count[id];

  for (int g = 0; g < ecfg.grad_steps_per_epoch; ++g) {
    prot.train(shared, rng);
    report.protagonist_grad_steps += 1;
  }
  for (std::size_t k_idx : sampled) {  // std::set: ascending, deterministic order
    for (int g = 0; g < ecfg.grad_steps_per_epoch; ++g) {
      member_train_step(pop.active[k_idx], shared, lcfg, rng);
      report.member_grad_steps += 1;
    }
  }
  return report;
}

EvolutionReport evolution_step(Population& pop, const ProtagonistLearnerIface& prot,
                               SharedReplay& shared, const GameConfig& env,
                               const EnsembleConfig& ecfg, const LearnerConfig& lcfg,
                               const OpponentModelSet& models, std::mt19937_64& rng,
                               const MutantPolicyFactory& override_policy) {
  if (pop.active.empty()) throw std::logic_error("evolution_step: empty population");
  (void)lcfg;
  EvolutionReport report;
  for (int p = 0; p < ecfg.evo_population; ++p) {
    const std::size_t parent_idx =
        pop.active.size() > 1
            ? std::uniform_int_distribution<std::size_t>(0, pop.active.size() - 1)(rng)
            : 0;
    EnsembleMember& parent = pop.active[parent_idx];

    DenseNet ally_actor = parent.ac[0].actor;
    DenseNet enemy_actor = parent.ac[1].actor;
    mutate(ally_actor.params, ecfg.evo_sigma, rng());
    mutate(enemy_actor.params, ecfg.evo_sigma, rng());

    std::unique_ptr<OpponentPolicy> policy =
        override_policy ? override_policy(p, ally_actor, enemy_actor)
                        : std::make_unique<ActorOnlyOpponent>(&ally_actor, &enemy_actor, &env);

    double sum = 0;
    for (int e = 0; e < ecfg.evo_episodes; ++e) {
      auto prot_policy = prot.make_policy(/*explore=*/false);
      EpisodeOptions opts;
      opts.opponent_member_id = parent.member_id;
      opts.source = TransitionSource::Mutant;
      EpisodeResult ep = run_episode(env, *prot_policy, *policy, models, prot.mode(), rng, opts);
      for (const Transition& t : ep.opponent_transitions) {
        shared.opponent_buffer(ep.opponent_type).append(t);
        report.transitions_added += 1;
      }
      sum += ep.opponent_return;
    }
    const double avg = sum / std::max(1, ecfg.evo_episodes);
    report.mutants += 1;
    report.mutant_avg_returns.push_back(avg);

    if (parent.has_stats && avg > parent.running_avg + ecfg.evo_margin) {
      parent.ac[0].replace_actor_params(ally_actor.params);
      parent.ac[1].replace_actor_params(enemy_actor.params);
      parent.running_avg = avg;  // the accepted mutant's measured level is the new baseline
      report.replaced_member_ids.push_back(parent.member_id);
    }
  }
  return report;
}

std::optional<OpponentModelSet> try_distill_models(const SharedReplay& shared,
                                                   const DistillConfig& dcfg,
                                                   const GameConfig& env, std::mt19937_64& rng,
                                                   std::array<DistillResult, kNumTypes>* results) {
  for (int t = 0; t < kNumTypes; ++t) {
    std::size_t count = 0;
    const ReplayBuffer& buf = shared.opponent[t];
    for (std::size_t i = 0; i < buf.size(); ++i) {
      if (buf.at(i).tag.role == Role::Opponent) count += 1;
    }
    if (count < dcfg.min_samples) return std::nullopt;
  }
  DistillResult ally = distill(shared.opponent[0], AgentType::Ally, dcfg, rng);
  DistillResult enemy = distill(shared.opponent[1], AgentType::Enemy, dcfg, rng);
  OpponentModelSet models = OpponentModelSet::from_nets(ally.net, enemy.net, env);
  if (results) {
    (*results)[0] = std::move(ally);
    (*results)[1] = std::move(enemy);
  }
  return models;
}

}  // namespace aiig
