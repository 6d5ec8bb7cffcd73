#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "aiig/checkpoint.hpp"
#include "aiig/distill.hpp"
#include "aiig/learner.hpp"
#include "aiig/recurrent_learner.hpp"
#include "aiig/replay.hpp"
#include "aiig/rollout.hpp"

namespace aiig {

// --- Protagonist learner abstraction ---
// The self-play loop is agnostic to whether the protagonist is the belief-space
// dense learner or the recurrent baseline.

class ProtagonistLearnerIface {
 public:
  virtual ~ProtagonistLearnerIface() = default;
  virtual PolicyMode mode() const = 0;
  virtual std::unique_ptr<ProtagonistPolicy> make_policy(bool explore) const = 0;
  // Stores the episode's protagonist-side experience.
  virtual void observe_episode(const EpisodeResult& ep, SharedReplay& shared) = 0;
  virtual TrainReport train(SharedReplay& shared, std::mt19937_64& rng) = 0;
  virtual void add_to_checkpoint(Checkpoint& ckpt) const = 0;
};

class BeliefProtagonistLearner : public ProtagonistLearnerIface {
 public:
  BeliefProtagonistLearner(const GameConfig& env, LearnerConfig cfg, std::mt19937_64& init_rng);
  BeliefProtagonistLearner(LearnerConfig cfg, ActorCritic ac);  // checkpoint restore

  PolicyMode mode() const override { return PolicyMode::Belief; }
  std::unique_ptr<ProtagonistPolicy> make_policy(bool explore) const override;
  void observe_episode(const EpisodeResult& ep, SharedReplay& shared) override;
  TrainReport train(SharedReplay& shared, std::mt19937_64& rng) override;
  void add_to_checkpoint(Checkpoint& ckpt) const override;

  const ActorCritic& actor_critic() const { return ac_; }

 private:
  LearnerConfig cfg_;
  ActorCritic ac_;
  long step_index_ = 0;
};

class RecurrentProtagonistLearner : public ProtagonistLearnerIface {
 public:
  RecurrentProtagonistLearner(LearnerConfig cfg, RecurrentLearnerConfig rcfg,
                              std::mt19937_64& init_rng);
  RecurrentProtagonistLearner(LearnerConfig cfg, RecurrentLearnerConfig rcfg, RecurrentLearner rl);

  PolicyMode mode() const override { return PolicyMode::Recurrent; }
  std::unique_ptr<ProtagonistPolicy> make_policy(bool explore) const override;
  void observe_episode(const EpisodeResult& ep, SharedReplay& shared) override;
  TrainReport train(SharedReplay& shared, std::mt19937_64& rng) override;
  void add_to_checkpoint(Checkpoint& ckpt) const override;

  const RecurrentLearner& learner() const { return rl_; }

 private:
  LearnerConfig cfg_;
  RecurrentLearnerConfig rcfg_;
  RecurrentLearner rl_;
  EpisodeBuffer episodes_;
  long step_index_ = 0;
};

// --- Ensemble ---

struct EnsembleMember {
  int member_id = 0;
  double gamma = 0.99;
  std::array<ActorCritic, kNumTypes> ac;  // one per opponent type
  std::array<long, kNumTypes> train_steps{0, 0};
  double running_avg = 0;  // exponential moving average of episode returns
  bool has_stats = false;
  long episodes_played = 0;

  static EnsembleMember make(int id, double gamma, const GameConfig& env, std::mt19937_64& rng);
  void record_episode_return(double r, double alpha);
};

struct Population {
  std::vector<EnsembleMember> active;
  std::vector<EnsembleMember> deactivated;

  std::size_t k() const { return active.size(); }
  const EnsembleMember* find_active(int member_id) const;
};

struct EnsembleConfig {
  std::vector<double> gammas{0.9, 0.99, 0.997, 0.9995};
  int episodes_per_epoch = 20;
  int grad_steps_per_epoch = 64;
  double ema_alpha = 0.2;
  bool evolution_enabled = true;
  int evo_population = 8;
  double evo_sigma = 0.05;
  int evo_episodes = 3;
  double evo_margin = 0.5;
  int distill_cadence_epochs = 10;
  std::size_t buffer_capacity = 200000;
  DistillConfig distill;
};

Population make_population(const std::vector<double>& gammas, const GameConfig& env,
                           std::mt19937_64& rng);

// One gradient step for one member: both of its type nets train from their
// buffers (a type skips while its buffer holds fewer than a batch).
void member_train_step(EnsembleMember& m, SharedReplay& shared, const LearnerConfig& base_cfg,
                       std::mt19937_64& rng);

struct EpochReport {
  int episodes = 0;
  double protagonist_state_return_mean = 0;
  double protagonist_stored_return_mean = 0;
  std::map<int, double> member_return_mean;  // member_id -> mean over its episodes
  std::map<int, int> member_episode_count;
  int protagonist_grad_steps = 0;
  int member_grad_steps = 0;
};

// E episodes, each against a uniformly drawn member, appending both sides'
// transitions; then G gradient steps for the protagonist and for each distinct
// member that was sampled.
EpochReport self_play_epoch(ProtagonistLearnerIface& prot, Population& pop, SharedReplay& shared,
                            const GameConfig& env, const EnsembleConfig& ecfg,
                            const LearnerConfig& lcfg, const OpponentModelSet& models,
                            std::mt19937_64& rng);

// Builds a mutant policy for evaluation; used by tests to rig outcomes.
using MutantPolicyFactory = std::function<std::unique_ptr<OpponentPolicy>(
    int mutant_index, const DenseNet& ally_actor, const DenseNet& enemy_actor)>;

struct EvolutionReport {
  int mutants = 0;
  std::size_t transitions_added = 0;
  std::vector<double> mutant_avg_returns;
  std::vector<int> replaced_member_ids;
};

// P gaussian-perturbed clones of random members, each measured over a few
// episodes against the frozen protagonist; trajectories feed the shared buffer,
// and a mutant replaces its parent's actors only when it beats the parent's
// running average by the acceptance margin.
EvolutionReport evolution_step(Population& pop, const ProtagonistLearnerIface& prot,
                               SharedReplay& shared, const GameConfig& env,
                               const EnsembleConfig& ecfg, const LearnerConfig& lcfg,
                               const OpponentModelSet& models, std::mt19937_64& rng,
                               const MutantPolicyFactory& override_policy = nullptr);

// Distills both per-type models from the shared buffer; nullopt (and no model
// change) when either type lacks cfg.distill.min_samples transitions.
std::optional<OpponentModelSet> try_distill_models(const SharedReplay& shared,
                                                   const DistillConfig& dcfg,
                                                   const GameConfig& env, std::mt19937_64& rng,
                                                   std::array<DistillResult, kNumTypes>* results
                                                   = nullptr);

}  // namespace aiig
