#pragma once

#include <random>
#include <vector>

#include "aiig/learner.hpp"
#include "aiig/replay.hpp"
#include "aiig/rnn.hpp"

namespace aiig {

// Episode-granular storage for the belief-free baseline: the GRU actor needs
// whole sequences to rebuild hidden state, so the ring holds episodes.
class EpisodeBuffer {
 public:
  explicit EpisodeBuffer(std::size_t capacity_episodes);

  void append(std::vector<Transition> episode);
  std::size_t size() const { return episodes_.size(); }
  std::size_t total_transitions() const { return total_transitions_; }
  const std::vector<Transition>& at(std::size_t i) const { return episodes_.at(i); }
  const std::vector<Transition>& sample_episode(std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::vector<std::vector<Transition>> episodes_;
  std::size_t next_ = 0;
  std::size_t total_transitions_ = 0;
};

struct RecurrentLearnerConfig {
  int hidden_size = 32;
  std::size_t batch_episodes = 8;
  std::size_t min_episodes = 8;  // warmup threshold
  std::size_t episode_capacity = 4000;
};

// Same training scheme as the dense learner, adapted to sequences: critics are
// feedforward twins over (raw features, one-hot action); the actor is the GRU,
// updated by backpropagation through the full unroll of each sampled episode.
struct RecurrentLearner {
  RecurrentNet actor, target_actor;
  DenseNet q1, q2, target_q1, target_q2;
  AdamState actor_opt, q1_opt, q2_opt;

  static RecurrentLearner make(int obs_dim, int n_actions, const RecurrentLearnerConfig& rcfg,
                               std::mt19937_64& rng);
  // Checkpoint restore: adopts the given nets with fresh optimizer moments.
  static RecurrentLearner from_nets(RecurrentNet actor, RecurrentNet target_actor, DenseNet q1,
                                    DenseNet q2, DenseNet target_q1, DenseNet target_q2);

  TrainReport train_step(const EpisodeBuffer& buffer, const LearnerConfig& cfg,
                         const RecurrentLearnerConfig& rcfg, long step_index,
                         std::mt19937_64& rng);
};

}  // namespace aiig
