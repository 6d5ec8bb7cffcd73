#include "aiig/recurrent_learner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aiig {

EpisodeBuffer::EpisodeBuffer(std::size_t capacity_episodes) : capacity_(capacity_episodes) {
  if (capacity_ == 0) throw std::invalid_argument("EpisodeBuffer capacity must be positive");
}

void EpisodeBuffer::append(std::vector<Transition> episode) {
  if (episode.empty()) throw std::invalid_argument("EpisodeBuffer: empty episode");
  total_transitions_ += episode.size();
  if (episodes_.size() < capacity_) {
    episodes_.push_back(std::move(episode));
  } else {
    total_transitions_ -= episodes_[next_].size();
    episodes_[next_] = std::move(episode);
    next_ = (next_ + 1) % capacity_;
  }
}

const std::vector<Transition>& EpisodeBuffer::sample_episode(std::mt19937_64& rng) const {
  if (episodes_.empty()) throw std::logic_error("sample from an empty EpisodeBuffer");
  std::uniform_int_distribution<std::size_t> pick(0, episodes_.size() - 1);
  return episodes_[pick(rng)];
}

RecurrentLearner RecurrentLearner::make(int obs_dim, int n_actions,
                                        const RecurrentLearnerConfig& rcfg,
                                        std::mt19937_64& rng) {
  RecurrentLearner rl;
  rl.actor = RecurrentNet::make_random(obs_dim, rcfg.hidden_size, n_actions, Head::Softmax, rng);
  rl.q1 = DenseNet::make_random({obs_dim + n_actions, 64, 64, 1}, Head::Linear, rng);
  rl.q2 = DenseNet::make_random({obs_dim + n_actions, 64, 64, 1}, Head::Linear, rng);
  rl.target_actor = rl.actor;
  rl.target_q1 = rl.q1;
  rl.target_q2 = rl.q2;
  rl.actor_opt = AdamState::for_params(rl.actor.param_count());
  rl.q1_opt = AdamState::for_params(rl.q1.param_count());
  rl.q2_opt = AdamState::for_params(rl.q2.param_count());
  return rl;
}

RecurrentLearner RecurrentLearner::from_nets(RecurrentNet actor, RecurrentNet target_actor,
                                             DenseNet q1, DenseNet q2, DenseNet target_q1,
                                             DenseNet target_q2) {
  RecurrentLearner rl;
  rl.actor = std::move(actor);
  rl.target_actor = std::move(target_actor);
  rl.q1 = std::move(q1);
  rl.q2 = std::move(q2);
  rl.target_q1 = std::move(target_q1);
  rl.target_q2 = std::move(target_q2);
  rl.actor_opt = AdamState::for_params(rl.actor.param_count());
  rl.q1_opt = AdamState::for_params(rl.q1.param_count());
  rl.q2_opt = AdamState::for_params(rl.q2.param_count());
  return rl;
}

TrainReport RecurrentLearner::train_step(const EpisodeBuffer& buffer, const LearnerConfig& cfg,
                                         const RecurrentLearnerConfig& rcfg, long step_index,
                                         std::mt19937_64& rng) {
  TrainReport report;
  if (buffer.size() < rcfg.min_episodes) {
    report.status = TrainStatus::WarmingUp;
    return report;
  }

  std::vector<const std::vector<Transition>*> episodes;
  episodes.reserve(rcfg.batch_episodes);
  std::size_t total = 0;
  for (std::size_t i = 0; i < rcfg.batch_episodes; ++i) {
    episodes.push_back(&buffer.sample_episode(rng));
    total += episodes.back()->size();
  }
  const int n = actor.output_size;
  const double inv_n = 1.0 / static_cast<double>(total);
  const bool update_actor = step_index % cfg.policy_delay == 0;

  std::vector<double> q1_grads(q1.param_count(), 0.0);
  std::vector<double> q2_grads(q2.param_count(), 0.0);
  std::vector<double> actor_grads;
  if (update_actor) actor_grads.assign(actor.param_count(), 0.0);
  double critic_loss = 0;
  double objective = 0;

  std::normal_distribution<double> smoothing(0.0, cfg.exploration_noise_std);
  for (const auto* epp : episodes) {
    const std::vector<Transition>& ep = *epp;
    std::vector<std::vector<double>> inputs(ep.size());
    for (std::size_t t = 0; t < ep.size(); ++t) inputs[t] = ep[t].input;

    // Target actor unroll gives the bootstrap action at every successor state.
    // Episodes end with done=true, so position T needs no evaluation.
    std::vector<std::vector<double>> target_logits;
    {
      std::vector<double> h(target_actor.hidden_size, 0.0);
      for (const auto& x : inputs) {
        h = gru_step(target_actor, x, h);
        target_logits.push_back(readout_logits(target_actor, h));
      }
    }

    std::vector<double> y(ep.size());
    for (std::size_t t = 0; t < ep.size(); ++t) {
      double boot = 0;
      if (!ep[t].done) {
        if (t + 1 >= ep.size()) {
          throw std::logic_error("EpisodeBuffer episode does not end with done=true");
        }
        std::vector<double> logits = target_logits[t + 1];
        for (double& v : logits) {
          v += std::clamp(smoothing(rng), -cfg.noise_clip, cfg.noise_clip);
        }
        const int a = argmax_index(logits);
        boot = std::min(forward(target_q1, critic_input(ep[t].next_input, a, n))[0],
                        forward(target_q2, critic_input(ep[t].next_input, a, n))[0]);
      }
      y[t] = ep[t].reward + cfg.gamma * (ep[t].done ? 0.0 : 1.0) * boot;
    }

    for (std::size_t t = 0; t < ep.size(); ++t) {
      const std::vector<double> in = critic_input(ep[t].input, ep[t].action, n);
      for (DenseNet* critic : {&q1, &q2}) {
        DenseCache cache;
        const double q = forward(*critic, in, &cache)[0];
        const double err = q - y[t];
        critic_loss += 0.5 * err * err * inv_n;
        const std::vector<double> out_grad{2.0 * err * inv_n};
        backward(*critic, cache, out_grad, critic == &q1 ? q1_grads : q2_grads);
      }
    }

    if (update_actor) {
      RecurrentCache cache;
      const auto probs = recurrent_forward(actor, inputs, &cache);
      std::vector<std::vector<double>> out_grads(ep.size());
      for (std::size_t t = 0; t < ep.size(); ++t) {
        std::vector<double> qrow(n);
        for (int a = 0; a < n; ++a) {
          qrow[a] = forward(q1, critic_input(ep[t].input, a, n))[0];
        }
        out_grads[t].resize(n);
        for (int a = 0; a < n; ++a) {
          objective += probs[t][a] * qrow[a] * inv_n;
          out_grads[t][a] = -qrow[a] * inv_n;
        }
      }
      recurrent_backward(actor, cache, out_grads, actor_grads);
    }
  }

  adam_step(q1.params, q1_grads, q1_opt, cfg.critic_lr);
  adam_step(q2.params, q2_grads, q2_opt, cfg.critic_lr);
  report.critic_loss = critic_loss;

  if (update_actor) {
    adam_step(actor.params, actor_grads, actor_opt, cfg.actor_lr);
    report.actor_updated = true;
    report.actor_objective = objective;
    soft_update(target_actor.params, actor.params, cfg.tau);
    soft_update(target_q1.params, q1.params, cfg.tau);
    soft_update(target_q2.params, q2.params, cfg.tau);
  }
  return report;
}

}  // namespace aiig
