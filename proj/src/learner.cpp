#include "aiig/learner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aiig {

ActorCritic ActorCritic::make(int obs_dim, int n_actions, std::mt19937_64& rng,
                              const std::vector<int>& hidden) {
  auto with_ends = [&](int in, int out) {
    std::vector<int> sizes;
    sizes.push_back(in);
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(out);
    return sizes;
  };
  ActorCritic ac;
  ac.actor = DenseNet::make_random(with_ends(obs_dim, n_actions), Head::Softmax, rng);
  ac.q1 = DenseNet::make_random(with_ends(obs_dim + n_actions, 1), Head::Linear, rng);
  ac.q2 = DenseNet::make_random(with_ends(obs_dim + n_actions, 1), Head::Linear, rng);
  ac.target_actor = ac.actor;
  ac.target_q1 = ac.q1;
  ac.target_q2 = ac.q2;
  ac.actor_opt = AdamState::for_params(ac.actor.param_count());
  ac.q1_opt = AdamState::for_params(ac.q1.param_count());
  ac.q2_opt = AdamState::for_params(ac.q2.param_count());
  return ac;
}

ActorCritic ActorCritic::from_nets(DenseNet actor, DenseNet q1, DenseNet q2,
                                   DenseNet target_actor, DenseNet target_q1,
                                   DenseNet target_q2) {
  ActorCritic ac;
  ac.actor = std::move(actor);
  ac.q1 = std::move(q1);
  ac.q2 = std::move(q2);
  ac.target_actor = std::move(target_actor);
  ac.target_q1 = std::move(target_q1);
  ac.target_q2 = std::move(target_q2);
  ac.actor_opt = AdamState::for_params(ac.actor.param_count());
  ac.q1_opt = AdamState::for_params(ac.q1.param_count());
  ac.q2_opt = AdamState::for_params(ac.q2.param_count());
  return ac;
}

void ActorCritic::replace_actor_params(const std::vector<double>& params) {
  if (params.size() != actor.params.size()) {
    throw std::invalid_argument("replace_actor_params: size mismatch");
  }
  actor.params = params;
  actor_opt = AdamState::for_params(actor.param_count());
}

std::vector<double> critic_input(std::span<const double> obs, int action, int n_actions) {
  if (action < 0 || action >= n_actions) throw std::out_of_range("critic_input: bad action");
  std::vector<double> in(obs.begin(), obs.end());
  in.resize(obs.size() + n_actions, 0.0);
  in[obs.size() + action] = 1.0;
  return in;
}

std::vector<double> policy_probs(const DenseNet& actor, std::span<const double> input) {
  return forward(actor, input);
}

namespace {

std::vector<double> actor_logits(const DenseNet& actor, std::span<const double> input) {
  DenseCache cache;
  forward(actor, input, &cache);
  return cache.pre.back();
}

void add_clipped_noise(std::vector<double>& logits, double sigma, double clip,
                       std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, sigma);
  for (double& v : logits) v += std::clamp(noise(rng), -clip, clip);
}

double q_value(const DenseNet& critic, std::span<const double> obs, int action, int n_actions) {
  return forward(critic, critic_input(obs, action, n_actions))[0];
}

}  // namespace

ActResult act(const ActorCritic& ac, std::span<const double> input, bool explore,
              const LearnerConfig& cfg, std::mt19937_64& rng) {
  if (!explore) {
    ActResult out;
    out.probs = policy_probs(ac.actor, input);
    out.action = argmax_index(out.probs);
    return out;
  }
  std::vector<double> logits = actor_logits(ac.actor, input);
  add_clipped_noise(logits, cfg.exploration_noise_std, cfg.noise_clip, rng);
  ActResult out;
  out.probs = softmax(logits);
  out.action = sample_categorical(out.probs, rng);
  return out;
}

std::vector<double> critic_targets(const ActorCritic& ac,
                                   const std::vector<const Transition*>& batch,
                                   const LearnerConfig& cfg, std::mt19937_64& rng,
                                   bool smoothing_noise) {
  const int n = ac.n_actions();
  std::vector<double> y(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Transition& t = *batch[i];
    double boot = 0;
    if (!t.done) {
      std::vector<double> logits = actor_logits(ac.target_actor, t.next_input);
      if (smoothing_noise) {
        add_clipped_noise(logits, cfg.exploration_noise_std, cfg.noise_clip, rng);
      }
      const int a = argmax_index(logits);
      boot = std::min(q_value(ac.target_q1, t.next_input, a, n),
                      q_value(ac.target_q2, t.next_input, a, n));
    }
    y[i] = t.reward + cfg.gamma * (1.0 - (t.done ? 1.0 : 0.0)) * boot;
  }
  return y;
}

TrainReport train_step(ActorCritic& ac, const ReplayBuffer& buffer, const LearnerConfig& cfg,
                       long step_index, std::mt19937_64& rng) {
  TrainReport report;
  if (buffer.size() < cfg.batch_size) {
    report.status = TrainStatus::WarmingUp;
    return report;
  }
  const std::vector<const Transition*> batch = buffer.sample(cfg.batch_size, rng);
  const std::vector<double> y = critic_targets(ac, batch, cfg, rng);
  const int n = ac.n_actions();
  const double inv_b = 1.0 / static_cast<double>(batch.size());

  // Critic regression toward the shared targets.
  for (DenseNet* critic : {&ac.q1, &ac.q2}) {
    std::vector<double> grads(critic->param_count(), 0.0);
    double loss = 0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const Transition& t = *batch[i];
      DenseCache cache;
      const std::vector<double> in = critic_input(t.input, t.action, n);
      const double q = forward(*critic, in, &cache)[0];
      const double err = q - y[i];
      loss += err * err * inv_b;
      const std::vector<double> out_grad{2.0 * err * inv_b};
      backward(*critic, cache, out_grad, grads);
    }
    AdamState& opt = critic == &ac.q1 ? ac.q1_opt : ac.q2_opt;
    adam_step(critic->params, grads, opt, cfg.critic_lr);
    report.critic_loss += 0.5 * loss;
  }

  if (step_index % cfg.policy_delay == 0) {
    // Maximize (1/B) sum_s sum_a pi(a|s) Q1(s,a); Q1 is held fixed, so the
    // gradient w.r.t. the head output is just the row of Q values.
    std::vector<double> grads(ac.actor.param_count(), 0.0);
    double objective = 0;
    std::vector<double> cin;
    std::vector<double> qrow(n);
    std::vector<double> out_grad(n);
    for (const Transition* tp : batch) {
      DenseCache cache;
      const std::vector<double> probs = forward(ac.actor, tp->input, &cache);
      cin = critic_input(tp->input, 0, n);
      for (int a = 0; a < n; ++a) {
        cin[tp->input.size() + a] = 1.0;
        if (a > 0) cin[tp->input.size() + a - 1] = 0.0;
        qrow[a] = forward(ac.q1, cin)[0];
      }
      for (int a = 0; a < n; ++a) {
        objective += probs[a] * qrow[a] * inv_b;
        out_grad[a] = -qrow[a] * inv_b;  // ascend by descending the negation
      }
      backward(ac.actor, cache, out_grad, grads);
    }
    adam_step(ac.actor.params, grads, ac.actor_opt, cfg.actor_lr);
    report.actor_updated = true;
    report.actor_objective = objective;

    soft_update(ac.target_actor.params, ac.actor.params, cfg.tau);
    soft_update(ac.target_q1.params, ac.q1.params, cfg.tau);
    soft_update(ac.target_q2.params, ac.q2.params, cfg.tau);
  }
  return report;
}

}  // namespace aiig
