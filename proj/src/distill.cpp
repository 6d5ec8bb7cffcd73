#include "aiig/distill.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace aiig {

DistillDataset build_distill_dataset(const ReplayBuffer& buffer, AgentType type,
                                     std::size_t min_samples) {
  DistillDataset ds;
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    const Transition& t = buffer.at(i);
    if (t.tag.role != Role::Opponent || t.tag.type != type) continue;
    ds.inputs.push_back(t.input);
    ds.targets.push_back(t.action_probs);
  }
  if (ds.inputs.size() < min_samples) {
    throw std::runtime_error("distillation for type '" + std::string(type_name(type)) +
                             "' needs at least " + std::to_string(min_samples) +
                             " samples, buffer holds " + std::to_string(ds.inputs.size()));
  }
  return ds;
}

DistillResult distill(const ReplayBuffer& buffer, AgentType type, const DistillConfig& cfg,
                      std::mt19937_64& rng) {
  DistillDataset ds = build_distill_dataset(buffer, type, cfg.min_samples);
  const std::size_t n = ds.inputs.size();
  const int in_dim = static_cast<int>(ds.inputs.front().size());
  const int out_dim = static_cast<int>(ds.targets.front().size());

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_holdout =
      std::max<std::size_t>(1, static_cast<std::size_t>(cfg.holdout_frac * n));
  const std::size_t n_train = n - n_holdout;
  if (n_train == 0) throw std::runtime_error("distill: empty training split");

  std::vector<int> sizes{in_dim};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(out_dim);
  DenseNet net = DenseNet::make_random(sizes, Head::Softmax, rng);
  AdamState opt = AdamState::for_params(net.param_count());

  std::uniform_int_distribution<std::size_t> pick(0, n_train - 1);
  std::vector<double> grads(net.param_count());
  for (int step = 0; step < cfg.steps; ++step) {
    std::fill(grads.begin(), grads.end(), 0.0);
    const double inv_b = 1.0 / static_cast<double>(cfg.batch);
    for (std::size_t b = 0; b < cfg.batch; ++b) {
      const std::size_t idx = order[pick(rng)];
      DenseCache cache;
      const std::vector<double> p = forward(net, ds.inputs[idx], &cache);
      std::vector<double> out_grad(out_dim);
      for (int a = 0; a < out_dim; ++a) {
        out_grad[a] = 2.0 * (p[a] - ds.targets[idx][a]) * inv_b;
      }
      backward(net, cache, out_grad, grads);
    }
    adam_step(net.params, grads, opt, cfg.lr);
  }

  DistillResult res;
  res.n_train = n_train;
  res.n_holdout = n_holdout;
  double mse = 0;
  for (std::size_t i = n_train; i < n; ++i) {
    const std::size_t idx = order[i];
    const std::vector<double> p = forward(net, ds.inputs[idx]);
    double err = 0;
    for (int a = 0; a < out_dim; ++a) {
      const double d = p[a] - ds.targets[idx][a];
      err += d * d;
    }
    mse += err;
  }
  res.holdout_mse = mse / static_cast<double>(n_holdout);
  res.net = std::move(net);
  return res;
}

std::vector<double> exact_average(const std::vector<const DenseNet*>& member_actors,
                                  std::span<const double> input) {
  if (member_actors.empty()) throw std::invalid_argument("exact_average: no members");
  std::vector<double> avg(member_actors.front()->output_size(), 0.0);
  for (const DenseNet* actor : member_actors) {
    const std::vector<double> p = forward(*actor, input);
    for (std::size_t i = 0; i < avg.size(); ++i) avg[i] += p[i];
  }
  for (double& v : avg) v /= static_cast<double>(member_actors.size());
  return avg;
}

}  // namespace aiig
