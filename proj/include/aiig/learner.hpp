#pragma once

#include <random>
#include <span>
#include <vector>

#include "aiig/net.hpp"
#include "aiig/replay.hpp"

namespace aiig {

// Twin-critic off-policy learner for discrete actions: clipped double-Q
// targets, target policy smoothing in logit space, delayed actor updates, and
// an exact expected-Q actor objective sum_a pi(a|s) Q1(s,a) (no sampling, no
// reparameterization; the critic is frozen during the actor step).

struct LearnerConfig {
  double gamma = 0.99;
  double actor_lr = 5e-5;
  double critic_lr = 1e-3;
  double tau = 5e-3;                    // soft-update rate
  double exploration_noise_std = 0.2;   // logit-space, also target smoothing
  double noise_clip = 0.5;
  int policy_delay = 2;
  std::size_t batch_size = 128;
};

struct ActorCritic {
  DenseNet actor, q1, q2;
  DenseNet target_actor, target_q1, target_q2;
  AdamState actor_opt, q1_opt, q2_opt;

  static ActorCritic make(int obs_dim, int n_actions, std::mt19937_64& rng,
                          const std::vector<int>& hidden = {64, 64});
  // Checkpoint restore: adopts the given nets with fresh optimizer moments.
  static ActorCritic from_nets(DenseNet actor, DenseNet q1, DenseNet q2, DenseNet target_actor,
                               DenseNet target_q1, DenseNet target_q2);
  int n_actions() const { return actor.output_size(); }
  int obs_dim() const { return actor.input_size(); }
  // Replace the online actor (neuroevolution acceptance); resets actor moments.
  void replace_actor_params(const std::vector<double>& params);
};

// obs features followed by a one-hot action block.
std::vector<double> critic_input(std::span<const double> obs, int action, int n_actions);

// Noiseless policy distribution at `input`.
std::vector<double> policy_probs(const DenseNet& actor, std::span<const double> input);

struct ActResult {
  int action = 0;
  std::vector<double> probs;  // the distribution the action was drawn from
};

// explore=true: clipped Gaussian noise on the logits, then sample the softmax.
// explore=false: argmax of the noiseless distribution (no RNG consumed).
ActResult act(const ActorCritic& ac, std::span<const double> input, bool explore,
              const LearnerConfig& cfg, std::mt19937_64& rng);

// Clipped double-Q targets y = r + gamma * (1 - done) * min(Q1', Q2') evaluated
// at the argmax of the smoothing-noised target actor logits.
std::vector<double> critic_targets(const ActorCritic& ac,
                                   const std::vector<const Transition*>& batch,
                                   const LearnerConfig& cfg, std::mt19937_64& rng,
                                   bool smoothing_noise = true);

enum class TrainStatus { Ok, WarmingUp };

struct TrainReport {
  TrainStatus status = TrainStatus::Ok;
  double critic_loss = 0;      // mean of the two critics' MSE
  bool actor_updated = false;
  double actor_objective = 0;  // batch-mean expected Q under the updated-from policy
};

// One gradient step. The actor (and target nets) update only when
// step_index % policy_delay == 0. Returns WarmingUp when the buffer holds
// fewer than batch_size transitions (no parameters change).
TrainReport train_step(ActorCritic& ac, const ReplayBuffer& buffer, const LearnerConfig& cfg,
                       long step_index, std::mt19937_64& rng);

}  // namespace aiig
