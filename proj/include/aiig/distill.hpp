#pragma once

#include <random>
#include <vector>

#include "aiig/belief.hpp"
#include "aiig/net.hpp"
#include "aiig/replay.hpp"

namespace aiig {

// Compresses the opponent ensemble into one model per type for the belief
// filter. The KL-sum objective is minimized by the plain average of member
// policies; rather than average K live nets at every filter query, a small
// softmax net is regressed (MSE on probability vectors) onto the noiseless
// action distributions stored in the shared replay, which were produced by the
// members themselves.

struct DistillDataset {
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> targets;  // stored action_probs
};

// Collects every transition of the given type from an opponent buffer. Throws
// std::runtime_error naming the type and count when fewer than min_samples.
DistillDataset build_distill_dataset(const ReplayBuffer& buffer, AgentType type,
                                     std::size_t min_samples = 1000);

struct DistillConfig {
  int steps = 5000;
  std::size_t batch = 256;
  double lr = 1e-3;
  double holdout_frac = 0.1;
  std::vector<int> hidden = {64, 64};
  std::size_t min_samples = 1000;
};

struct DistillResult {
  DenseNet net;
  double holdout_mse = 0;  // per-sample, summed over action dims
  std::size_t n_train = 0;
  std::size_t n_holdout = 0;
};

DistillResult distill(const ReplayBuffer& buffer, AgentType type, const DistillConfig& cfg,
                      std::mt19937_64& rng);

// Reference combiner: the exact minimizer of the summed KL objective at one
// input, for oracle comparisons against the fitted net.
std::vector<double> exact_average(const std::vector<const DenseNet*>& member_actors,
                                  std::span<const double> input);

}  // namespace aiig
