#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace aiig {

// Flat-parameter dense nets with ReLU hidden layers and a linear or softmax
// head. Everything is double precision; parameters live in one contiguous
// vector so checkpointing, mutation, and soft updates are plain array ops.

enum class Head { Linear, Softmax };

struct DenseNet {
  std::vector<int> layer_sizes;  // input, hidden..., output
  Head head = Head::Linear;
  std::vector<double> params;    // per layer: weights row-major (out x in), then biases

  static DenseNet make(std::vector<int> sizes, Head head);  // zero-initialized
  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases.
  static DenseNet make_random(std::vector<int> sizes, Head head, std::mt19937_64& rng);

  int input_size() const { return layer_sizes.front(); }
  int output_size() const { return layer_sizes.back(); }
  std::size_t num_layers() const { return layer_sizes.size() - 1; }
  std::size_t param_count() const;
  std::size_t layer_offset(std::size_t layer) const;  // start of layer's weights in params

  std::string arch_string() const;  // e.g. "dense 7 64 64 6 softmax"
  static DenseNet from_arch_string(const std::string& arch);
};

struct DenseCache {
  std::vector<std::vector<double>> acts;  // acts[0] = input, acts[L] = head output
  std::vector<std::vector<double>> pre;   // pre-activation per layer
};

// Forward pass; fills `cache` (when given) for a later backward pass.
std::vector<double> forward(const DenseNet& net, std::span<const double> input,
                            DenseCache* cache = nullptr);

// Backward pass from d(loss)/d(output). For a softmax head the gradient is
// taken with respect to the post-softmax output (the exact Jacobian is applied
// internally). Accumulates into `param_grads` (sized param_count, caller-zeroed
// or carrying other samples' gradients); optionally emits d(loss)/d(input).
void backward(const DenseNet& net, const DenseCache& cache, std::span<const double> out_grad,
              std::vector<double>& param_grads, std::vector<double>* input_grad = nullptr);

// Softmax head Jacobian-vector product: given probabilities p and upstream
// gradient g (w.r.t. p), returns the gradient w.r.t. the logits.
std::vector<double> softmax_backward(std::span<const double> probs, std::span<const double> grad);

std::vector<double> softmax(std::span<const double> logits);

// --- Optimization ---

struct AdamState {
  std::vector<double> m, v;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_params(std::size_t n);
};

void adam_step(std::vector<double>& params, std::span<const double> grads, AdamState& state,
               double lr);

// target <- (1 - tau) target + tau source
void soft_update(std::vector<double>& target, std::span<const double> source, double tau);

// In-place Gaussian perturbation, its own generator seeded by `seed` so a
// mutation is reproducible independent of caller RNG state.
void mutate(std::vector<double>& params, double sigma, std::uint64_t seed);

// Inverse-CDF categorical draw from a probability vector (assumed normalized;
// trailing mass absorbs rounding).
int sample_categorical(std::span<const double> probs, std::mt19937_64& rng);

int argmax_index(std::span<const double> values);

}  // namespace aiig
