#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include "aiig/net.hpp"

namespace aiig {

// Single-layer GRU with an affine readout head, flat parameters, exact BPTT.
// Update convention: h' = (1 - z) o h + z o c, so zero parameters keep the
// all-zeros hidden state at a fixed point.
//
// Parameter layout: Wz(HxI) Uz(HxH) bz(H) | Wr Ur br | Wc Uc bc | Wo(OxH) bo(O)

struct RecurrentNet {
  int input_size = 0;
  int hidden_size = 0;
  int output_size = 0;
  Head head = Head::Softmax;
  std::vector<double> params;

  static RecurrentNet make(int input, int hidden, int output, Head head);
  static RecurrentNet make_random(int input, int hidden, int output, Head head,
                                  std::mt19937_64& rng);

  std::size_t param_count() const;
  std::string arch_string() const;  // e.g. "gru 12 32 6 softmax"
  static RecurrentNet from_arch_string(const std::string& arch);

  // Offsets into params.
  std::size_t off_wz() const;
  std::size_t off_uz() const;
  std::size_t off_bz() const;
  std::size_t off_wr() const;
  std::size_t off_ur() const;
  std::size_t off_br() const;
  std::size_t off_wc() const;
  std::size_t off_uc() const;
  std::size_t off_bc() const;
  std::size_t off_wo() const;
  std::size_t off_bo() const;
};

struct RecurrentCache {
  std::vector<std::vector<double>> x;    // inputs, one per step
  std::vector<std::vector<double>> h;    // h[0] = initial (zeros), h[t+1] after step t
  std::vector<std::vector<double>> z, r, c;
  std::vector<std::vector<double>> out_pre;  // readout logits
  std::vector<std::vector<double>> out;      // head output
};

// One cell update: returns h' for input x and hidden h.
std::vector<double> gru_step(const RecurrentNet& net, std::span<const double> x,
                             std::span<const double> h);

// Readout logits (pre-head) for a hidden state.
std::vector<double> readout_logits(const RecurrentNet& net, std::span<const double> h);

// Full-sequence forward from h0 = zeros; returns per-step head outputs.
std::vector<std::vector<double>> recurrent_forward(const RecurrentNet& net,
                                                   const std::vector<std::vector<double>>& inputs,
                                                   RecurrentCache* cache = nullptr);

// BPTT from per-step gradients w.r.t. the head outputs (softmax Jacobian applied
// internally when head == Softmax). Accumulates into param_grads (caller-sized).
void recurrent_backward(const RecurrentNet& net, const RecurrentCache& cache,
                        const std::vector<std::vector<double>>& out_grads,
                        std::vector<double>& param_grads);

}  // namespace aiig
