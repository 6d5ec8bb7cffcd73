#include "aiig/rnn.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace aiig {

namespace {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// y += W x for an (out x in) row-major block at params[at].
void gemv_acc(const std::vector<double>& params, std::size_t at, int out, int in,
              std::span<const double> x, std::vector<double>& y) {
  for (int o = 0; o < out; ++o) {
    const double* w = params.data() + at + static_cast<std::size_t>(o) * in;
    double acc = 0;
    for (int i = 0; i < in; ++i) acc += w[i] * x[i];
    y[o] += acc;
  }
}

// y += W^T d.
void gemv_t_acc(const std::vector<double>& params, std::size_t at, int out, int in,
                std::span<const double> d, std::vector<double>& y) {
  for (int o = 0; o < out; ++o) {
    const double* w = params.data() + at + static_cast<std::size_t>(o) * in;
    for (int i = 0; i < in; ++i) y[i] += w[i] * d[o];
  }
}

// G += d x^T.
void outer_acc(std::vector<double>& grads, std::size_t at, int out, int in,
               std::span<const double> d, std::span<const double> x) {
  for (int o = 0; o < out; ++o) {
    double* g = grads.data() + at + static_cast<std::size_t>(o) * in;
    for (int i = 0; i < in; ++i) g[i] += d[o] * x[i];
  }
}

}  // namespace

std::size_t RecurrentNet::off_wz() const { return 0; }
std::size_t RecurrentNet::off_uz() const {
  return off_wz() + static_cast<std::size_t>(hidden_size) * input_size;
}
std::size_t RecurrentNet::off_bz() const {
  return off_uz() + static_cast<std::size_t>(hidden_size) * hidden_size;
}
std::size_t RecurrentNet::off_wr() const { return off_bz() + hidden_size; }
std::size_t RecurrentNet::off_ur() const {
  return off_wr() + static_cast<std::size_t>(hidden_size) * input_size;
}
std::size_t RecurrentNet::off_br() const {
  return off_ur() + static_cast<std::size_t>(hidden_size) * hidden_size;
}
std::size_t RecurrentNet::off_wc() const { return off_br() + hidden_size; }
std::size_t RecurrentNet::off_uc() const {
  return off_wc() + static_cast<std::size_t>(hidden_size) * input_size;
}
std::size_t RecurrentNet::off_bc() const {
  return off_uc() + static_cast<std::size_t>(hidden_size) * hidden_size;
}
std::size_t RecurrentNet::off_wo() const { return off_bc() + hidden_size; }
std::size_t RecurrentNet::off_bo() const {
  return off_wo() + static_cast<std::size_t>(output_size) * hidden_size;
}

std::size_t RecurrentNet::param_count() const {
  const std::size_t h = hidden_size, i = input_size, o = output_size;
  return 3 * (h * i + h * h + h) + o * h + o;
}

RecurrentNet RecurrentNet::make(int input, int hidden, int output, Head head) {
  if (input <= 0 || hidden <= 0 || output <= 0) {
    throw std::invalid_argument("RecurrentNet sizes must be positive");
  }
  RecurrentNet net;
  net.input_size = input;
  net.hidden_size = hidden;
  net.output_size = output;
  net.head = head;
  net.params.assign(net.param_count(), 0.0);
  return net;
}

RecurrentNet RecurrentNet::make_random(int input, int hidden, int output, Head head,
                                       std::mt19937_64& rng) {
  RecurrentNet net = make(input, hidden, output, head);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  std::uniform_real_distribution<double> u(-bound, bound);
  for (double& p : net.params) p = u(rng);
  return net;
}

std::string RecurrentNet::arch_string() const {
  std::ostringstream os;
  os << "gru " << input_size << ' ' << hidden_size << ' ' << output_size << ' '
     << (head == Head::Softmax ? "softmax" : "linear");
  return os.str();
}

RecurrentNet RecurrentNet::from_arch_string(const std::string& arch) {
  std::istringstream is(arch);
  std::string kind, head_name;
  int in = 0, hid = 0, out = 0;
  is >> kind >> in >> hid >> out >> head_name;
  if (kind != "gru" || !is) throw std::invalid_argument("not a gru arch string: " + arch);
  return make(in, hid, out, head_name == "softmax" ? Head::Softmax : Head::Linear);
}

std::vector<double> gru_step(const RecurrentNet& net, std::span<const double> x,
                             std::span<const double> h) {
  const int H = net.hidden_size, I = net.input_size;
  std::vector<double> z(net.params.begin() + net.off_bz(), net.params.begin() + net.off_bz() + H);
  gemv_acc(net.params, net.off_wz(), H, I, x, z);
  gemv_acc(net.params, net.off_uz(), H, H, h, z);
  std::vector<double> r(net.params.begin() + net.off_br(), net.params.begin() + net.off_br() + H);
  gemv_acc(net.params, net.off_wr(), H, I, x, r);
  gemv_acc(net.params, net.off_ur(), H, H, h, r);
  for (int i = 0; i < H; ++i) {
    z[i] = sigmoid(z[i]);
    r[i] = sigmoid(r[i]);
  }
  std::vector<double> rh(H);
  for (int i = 0; i < H; ++i) rh[i] = r[i] * h[i];
  std::vector<double> c(net.params.begin() + net.off_bc(), net.params.begin() + net.off_bc() + H);
  gemv_acc(net.params, net.off_wc(), H, I, x, c);
  gemv_acc(net.params, net.off_uc(), H, H, rh, c);
  std::vector<double> hn(H);
  for (int i = 0; i < H; ++i) {
    c[i] = std::tanh(c[i]);
    hn[i] = (1.0 - z[i]) * h[i] + z[i] * c[i];
  }
  return hn;
}

std::vector<double> readout_logits(const RecurrentNet& net, std::span<const double> h) {
  const int H = net.hidden_size, O = net.output_size;
  std::vector<double> out(net.params.begin() + net.off_bo(),
                          net.params.begin() + net.off_bo() + O);
  gemv_acc(net.params, net.off_wo(), O, H, h, out);
  return out;
}

namespace {

// gru_step variant that also exposes the gate values for the cache.
std::vector<double> gru_step_cached(const RecurrentNet& net, std::span<const double> x,
                                    std::span<const double> h, std::vector<double>& z_out,
                                    std::vector<double>& r_out, std::vector<double>& c_out) {
  const int H = net.hidden_size, I = net.input_size;
  std::vector<double> z(net.params.begin() + net.off_bz(), net.params.begin() + net.off_bz() + H);
  gemv_acc(net.params, net.off_wz(), H, I, x, z);
  gemv_acc(net.params, net.off_uz(), H, H, h, z);
  std::vector<double> r(net.params.begin() + net.off_br(), net.params.begin() + net.off_br() + H);
  gemv_acc(net.params, net.off_wr(), H, I, x, r);
  gemv_acc(net.params, net.off_ur(), H, H, h, r);
  for (int i = 0; i < H; ++i) {
    z[i] = sigmoid(z[i]);
    r[i] = sigmoid(r[i]);
  }
  std::vector<double> rh(H);
  for (int i = 0; i < H; ++i) rh[i] = r[i] * h[i];
  std::vector<double> c(net.params.begin() + net.off_bc(), net.params.begin() + net.off_bc() + H);
  gemv_acc(net.params, net.off_wc(), H, I, x, c);
  gemv_acc(net.params, net.off_uc(), H, H, rh, c);
  std::vector<double> hn(H);
  for (int i = 0; i < H; ++i) {
    c[i] = std::tanh(c[i]);
    hn[i] = (1.0 - z[i]) * h[i] + z[i] * c[i];
  }
  z_out = std::move(z);
  r_out = std::move(r);
  c_out = std::move(c);
  return hn;
}

}  // namespace

std::vector<std::vector<double>> recurrent_forward(const RecurrentNet& net,
                                                   const std::vector<std::vector<double>>& inputs,
                                                   RecurrentCache* cache) {
  std::vector<double> h(net.hidden_size, 0.0);
  if (cache) {
    *cache = RecurrentCache{};
    cache->h.push_back(h);
  }
  std::vector<std::vector<double>> outputs;
  outputs.reserve(inputs.size());
  for (const auto& x : inputs) {
    if (static_cast<int>(x.size()) != net.input_size) {
      throw std::invalid_argument("recurrent_forward: input width mismatch");
    }
    std::vector<double> z, r, c;
    std::vector<double> hn = gru_step_cached(net, x, h, z, r, c);
    std::vector<double> logits = readout_logits(net, hn);
    std::vector<double> out = net.head == Head::Softmax ? softmax(logits) : logits;
    if (cache) {
      cache->x.push_back(x);
      cache->z.push_back(std::move(z));
      cache->r.push_back(std::move(r));
      cache->c.push_back(std::move(c));
      cache->h.push_back(hn);
      cache->out_pre.push_back(logits);
      cache->out.push_back(out);
    }
    h = std::move(hn);
    outputs.push_back(std::move(out));
  }
  return outputs;
}

void recurrent_backward(const RecurrentNet& net, const RecurrentCache& cache,
                        const std::vector<std::vector<double>>& out_grads,
                        std::vector<double>& param_grads) {
  const std::size_t T = cache.x.size();
  if (out_grads.size() != T) {
    throw std::invalid_argument("recurrent_backward: out_grads length mismatch");
  }
  if (param_grads.size() != net.param_count()) {
    throw std::invalid_argument("recurrent_backward: param_grads must be sized to param_count");
  }
  const int H = net.hidden_size, O = net.output_size;

  std::vector<double> dh(H, 0.0);  // d(loss)/d(h after current step)
  for (std::size_t t = T; t-- > 0;) {
    // Readout.
    std::vector<double> dlogits = net.head == Head::Softmax
                                      ? softmax_backward(cache.out[t], out_grads[t])
                                      : out_grads[t];
    outer_acc(param_grads, net.off_wo(), O, H, dlogits, cache.h[t + 1]);
    for (int o = 0; o < O; ++o) param_grads[net.off_bo() + o] += dlogits[o];
    gemv_t_acc(net.params, net.off_wo(), O, H, dlogits, dh);

    // Cell. h_prev = cache.h[t].
    const std::vector<double>& hp = cache.h[t];
    const std::vector<double>& z = cache.z[t];
    const std::vector<double>& r = cache.r[t];
    const std::vector<double>& c = cache.c[t];
    const std::vector<double>& x = cache.x[t];

    std::vector<double> dh_prev(H), dz_pre(H), dc_pre(H);
    for (int i = 0; i < H; ++i) {
      dh_prev[i] = dh[i] * (1.0 - z[i]);
      const double dz = dh[i] * (c[i] - hp[i]);
      dz_pre[i] = dz * z[i] * (1.0 - z[i]);
      const double dc = dh[i] * z[i];
      dc_pre[i] = dc * (1.0 - c[i] * c[i]);
    }

    std::vector<double> rh(H);
    for (int i = 0; i < H; ++i) rh[i] = r[i] * hp[i];
    outer_acc(param_grads, net.off_wc(), H, net.input_size, dc_pre, x);
    outer_acc(param_grads, net.off_uc(), H, H, dc_pre, rh);
    for (int i = 0; i < H; ++i) param_grads[net.off_bc() + i] += dc_pre[i];

    std::vector<double> drh(H, 0.0);
    gemv_t_acc(net.params, net.off_uc(), H, H, dc_pre, drh);
    std::vector<double> dr_pre(H);
    for (int i = 0; i < H; ++i) {
      dr_pre[i] = drh[i] * hp[i] * r[i] * (1.0 - r[i]);
      dh_prev[i] += drh[i] * r[i];
    }

    outer_acc(param_grads, net.off_wr(), H, net.input_size, dr_pre, x);
    outer_acc(param_grads, net.off_ur(), H, H, dr_pre, hp);
    for (int i = 0; i < H; ++i) param_grads[net.off_br() + i] += dr_pre[i];
    gemv_t_acc(net.params, net.off_ur(), H, H, dr_pre, dh_prev);

    outer_acc(param_grads, net.off_wz(), H, net.input_size, dz_pre, x);
    outer_acc(param_grads, net.off_uz(), H, H, dz_pre, hp);
    for (int i = 0; i < H; ++i) param_grads[net.off_bz() + i] += dz_pre[i];
    gemv_t_acc(net.params, net.off_uz(), H, H, dz_pre, dh_prev);

    dh = std::move(dh_prev);
  }
}

}  // namespace aiig
