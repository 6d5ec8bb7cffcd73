#include "aiig/net.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace aiig {

namespace {

std::size_t count_params(const std::vector<int>& sizes) {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    n += static_cast<std::size_t>(sizes[l + 1]) * sizes[l] + sizes[l + 1];
  }
  return n;
}

void check_sizes(const std::vector<int>& sizes) {
  if (sizes.size() < 2) throw std::invalid_argument("DenseNet needs at least input and output");
  for (int s : sizes) {
    if (s <= 0) throw std::invalid_argument("DenseNet layer sizes must be positive");
  }
}

}  // namespace

DenseNet DenseNet::make(std::vector<int> sizes, Head head) {
  check_sizes(sizes);
  DenseNet net;
  net.layer_sizes = std::move(sizes);
  net.head = head;
  net.params.assign(count_params(net.layer_sizes), 0.0);
  return net;
}

DenseNet DenseNet::make_random(std::vector<int> sizes, Head head, std::mt19937_64& rng) {
  DenseNet net = make(std::move(sizes), head);
  std::size_t at = 0;
  for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
    const int in = net.layer_sizes[l];
    const int out = net.layer_sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (int i = 0; i < out * in + out; ++i) net.params[at++] = u(rng);
  }
  return net;
}

std::size_t DenseNet::param_count() const { return count_params(layer_sizes); }

std::size_t DenseNet::layer_offset(std::size_t layer) const {
  std::size_t at = 0;
  for (std::size_t l = 0; l < layer; ++l) {
    at += static_cast<std::size_t>(layer_sizes[l + 1]) * layer_sizes[l] + layer_sizes[l + 1];
  }
  return at;
}

std::string DenseNet::arch_string() const {
  std::ostringstream os;
  os << "dense";
  for (int s : layer_sizes) os << ' ' << s;
  os << ' ' << (head == Head::Softmax ? "softmax" : "linear");
  return os.str();
}

DenseNet DenseNet::from_arch_string(const std::string& arch) {
  std::istringstream is(arch);
  std::string kind;
  is >> kind;
  if (kind != "dense") throw std::invalid_argument("not a dense arch string: " + arch);
  std::vector<int> sizes;
  std::string tok;
  Head head = Head::Linear;
  while (is >> tok) {
    if (tok == "softmax") {
      head = Head::Softmax;
    } else if (tok == "linear") {
      head = Head::Linear;
    } else {
      sizes.push_back(std::stoi(tok));
    }
  }
  return make(std::move(sizes), head);
}

std::vector<double> softmax(std::span<const double> logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

std::vector<double> forward(const DenseNet& net, std::span<const double> input,
                            DenseCache* cache) {
  if (static_cast<int>(input.size()) != net.input_size()) {
    throw std::invalid_argument("forward: input size " + std::to_string(input.size()) +
                                " != expected " + std::to_string(net.input_size()));
  }
  std::vector<double> x(input.begin(), input.end());
  if (cache) {
    cache->acts.clear();
    cache->pre.clear();
    cache->acts.push_back(x);
  }
  const std::size_t layers = net.num_layers();
  std::size_t at = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = net.layer_sizes[l];
    const int out = net.layer_sizes[l + 1];
    std::vector<double> z(out);
    const double* W = net.params.data() + at;
    const double* bias = W + static_cast<std::size_t>(out) * in;
    // Four rows at a time: independent accumulator chains hide the FP add
    // latency while each row keeps its exact summation order.
    int o = 0;
    for (; o + 4 <= out; o += 4) {
      const double* w0 = W + static_cast<std::size_t>(o) * in;
      const double* w1 = w0 + in;
      const double* w2 = w1 + in;
      const double* w3 = w2 + in;
      double a0 = bias[o], a1 = bias[o + 1], a2 = bias[o + 2], a3 = bias[o + 3];
      for (int i = 0; i < in; ++i) {
        const double xi = x[i];
        a0 += w0[i] * xi;
        a1 += w1[i] * xi;
        a2 += w2[i] * xi;
        a3 += w3[i] * xi;
      }
      z[o] = a0;
      z[o + 1] = a1;
      z[o + 2] = a2;
      z[o + 3] = a3;
    }
    for (; o < out; ++o) {
      double acc = bias[o];
      const double* w = W + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) acc += w[i] * x[i];
      z[o] = acc;
    }
    at += static_cast<std::size_t>(out) * in + out;
    if (cache) cache->pre.push_back(z);
    const bool last = (l + 1 == layers);
    if (!last) {
      for (double& v : z) v = std::max(0.0, v);
      x = std::move(z);
    } else {
      x = net.head == Head::Softmax ? softmax(z) : std::move(z);
    }
    if (cache) cache->acts.push_back(x);
  }
  return x;
}

std::vector<double> softmax_backward(std::span<const double> probs, std::span<const double> grad) {
  // dL/dz_i = p_i * (g_i - sum_j g_j p_j)
  double dot = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) dot += grad[i] * probs[i];
  std::vector<double> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) out[i] = probs[i] * (grad[i] - dot);
  return out;
}

void backward(const DenseNet& net, const DenseCache& cache, std::span<const double> out_grad,
              std::vector<double>& param_grads, std::vector<double>* input_grad) {
  const std::size_t layers = net.num_layers();
  if (cache.acts.size() != layers + 1 || cache.pre.size() != layers) {
    throw std::invalid_argument("backward: cache does not match net (run forward with cache)");
  }
  if (param_grads.size() != net.param_count()) {
    throw std::invalid_argument("backward: param_grads must be sized to param_count");
  }

  std::vector<double> delta;  // d(loss)/d(pre-activation of current layer)
  if (net.head == Head::Softmax) {
    delta = softmax_backward(cache.acts.back(), out_grad);
  } else {
    delta.assign(out_grad.begin(), out_grad.end());
  }

  for (std::size_t l = layers; l-- > 0;) {
    const int in = net.layer_sizes[l];
    const int out = net.layer_sizes[l + 1];
    const std::size_t at = net.layer_offset(l);
    const std::vector<double>& x = cache.acts[l];

    // Parameter gradients for this layer.
    for (int o = 0; o < out; ++o) {
      const double d = delta[o];
      double* gw = param_grads.data() + at + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) gw[i] += d * x[i];
      param_grads[at + static_cast<std::size_t>(out) * in + o] += d;  // bias
    }

    const bool need_input = l > 0 || input_grad != nullptr;
    if (!need_input) break;

    std::vector<double> prev(in, 0.0);
    for (int o = 0; o < out; ++o) {
      const double d = delta[o];
      const double* w = net.params.data() + at + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) prev[i] += d * w[i];
    }
    if (l > 0) {
      // Through the ReLU of the previous layer.
      const std::vector<double>& zprev = cache.pre[l - 1];
      for (int i = 0; i < in; ++i) {
        if (zprev[i] <= 0) prev[i] = 0;
      }
      delta = std::move(prev);
    } else if (input_grad) {
      *input_grad = std::move(prev);
    }
  }
}

AdamState AdamState::for_params(std::size_t n) {
  AdamState s;
  s.m.assign(n, 0.0);
  s.v.assign(n, 0.0);
  return s;
}

void adam_step(std::vector<double>& params, std::span<const double> grads, AdamState& state,
               double lr) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw std::invalid_argument("adam_step: size mismatch");
  }
  state.step += 1;
  const double b1t = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double b2t = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
    const double mhat = state.m[i] / b1t;
    const double vhat = state.v[i] / b2t;
    params[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
  }
}

void soft_update(std::vector<double>& target, std::span<const double> source, double tau) {
  if (target.size() != source.size()) throw std::invalid_argument("soft_update: size mismatch");
  for (std::size_t i = 0; i < target.size(); ++i) {
    target[i] = (1.0 - tau) * target[i] + tau * source[i];
  }
}

void mutate(std::vector<double>& params, double sigma, std::uint64_t seed) {
  if (sigma == 0.0) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (double& p : params) p += noise(rng);
}

int sample_categorical(std::span<const double> probs, std::mt19937_64& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

int argmax_index(std::span<const double> values) {
  return static_cast<int>(std::max_element(values.begin(), values.end()) - values.begin());
}

}  // namespace aiig
