#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "aiig/belief.hpp"
#include "aiig/distill.hpp"

using namespace aiig;

namespace {

double kl(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0) s += p[i] * std::log(p[i] / std::max(q[i], 1e-300));
  }
  return s;
}

Transition opp_transition(AgentType type, std::vector<double> input,
                          std::vector<double> probs) {
  Transition t;
  t.input = std::move(input);
  t.action_probs = std::move(probs);
  t.tag.role = Role::Opponent;
  t.tag.type = type;
  return t;
}

}  // namespace

TEST_CASE("the arithmetic mean minimizes the summed forward KL (grid oracle)") {
  // Two member distributions over two actions; candidates q on a fine grid.
  // sum_k KL(p_k || q) must bottom out at q = mean(p_k).
  const std::vector<double> p1 = {0.9, 0.1};
  const std::vector<double> p2 = {0.3, 0.7};
  const double mean0 = 0.5 * (p1[0] + p2[0]);

  double best_q = -1, best_val = 1e18;
  for (int i = 1; i < 2000; ++i) {
    const double q0 = i / 2000.0;
    const std::vector<double> q = {q0, 1 - q0};
    const double val = kl(p1, q) + kl(p2, q);
    if (val < best_val) {
      best_val = val;
      best_q = q0;
    }
  }
  CHECK(best_q == doctest::Approx(mean0).epsilon(1e-3));
}

TEST_CASE("exact_average averages member policies pointwise") {
  std::mt19937_64 rng(4);
  DenseNet a = DenseNet::make_random({5, 8, 4}, Head::Softmax, rng);
  DenseNet b = DenseNet::make_random({5, 8, 4}, Head::Softmax, rng);
  DenseNet c = DenseNet::make_random({5, 8, 4}, Head::Softmax, rng);
  const std::vector<double> x = {0.1, 0.9, 0.4, 0.2, 0.5};

  const auto avg = exact_average({&a, &b, &c}, x);
  const auto pa = forward(a, x);
  const auto pb = forward(b, x);
  const auto pc = forward(c, x);
  double sum = 0;
  for (int i = 0; i < 4; ++i) {
    CHECK(avg[i] == doctest::Approx((pa[i] + pb[i] + pc[i]) / 3.0));
    sum += avg[i];
  }
  CHECK(sum == doctest::Approx(1.0));
}

TEST_CASE("dataset construction filters by role and type and enforces the floor") {
  ReplayBuffer buf(10000);
  for (int i = 0; i < 50; ++i) {
    buf.append(opp_transition(AgentType::Ally, {0.1, 0.2, 0.3, 0.4, 0.5}, {1, 0, 0, 0}));
  }
  for (int i = 0; i < 20; ++i) {
    buf.append(opp_transition(AgentType::Enemy, {0.5, 0.4, 0.3, 0.2, 0.1}, {0, 1, 0, 0}));
  }
  // Protagonist rows in an opponent buffer would be a bug elsewhere, but the
  // filter must still ignore them.
  Transition stray;
  stray.input = {1, 1, 1, 1, 1};
  stray.action_probs = {0.25, 0.25, 0.25, 0.25};
  stray.tag.role = Role::Protagonist;
  buf.append(stray);

  const auto ds = build_distill_dataset(buf, AgentType::Ally, 10);
  CHECK(ds.inputs.size() == 50);
  CHECK(ds.targets[0][0] == doctest::Approx(1.0));

  CHECK_THROWS_WITH_AS(build_distill_dataset(buf, AgentType::Enemy, 1000),
                       doctest::Contains("enemy"), std::runtime_error);
}

TEST_CASE("distillation recovers a context-dependent mixture of member policies") {
  // Synthetic members: one always moves left, one mixes on a feature. The
  // stored action_probs are their average (what self-play stores when members
  // alternate evenly); the distilled net must reproduce that map on held-out
  // inputs far better than a uniform guess.
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0, 1);

  ReplayBuffer buf(20000);
  for (int i = 0; i < 4000; ++i) {
    std::vector<double> x(kOpponentInputDim);
    for (auto& v : x) v = u(rng);
    // Member A: deterministic left. Member B: up when x[1] > 0.5 else right.
    const std::vector<double> pa = {1, 0, 0, 0};
    const std::vector<double> pb =
        x[1] > 0.5 ? std::vector<double>{0, 0, 1, 0} : std::vector<double>{0, 1, 0, 0};
    std::vector<double> avg(4);
    for (int k = 0; k < 4; ++k) avg[k] = 0.5 * (pa[k] + pb[k]);
    buf.append(opp_transition(AgentType::Enemy, std::move(x), std::move(avg)));
  }

  DistillConfig cfg;
  cfg.steps = 2500;
  cfg.batch = 128;
  cfg.hidden = {32, 32};
  cfg.min_samples = 100;
  const DistillResult res = distill(buf, AgentType::Enemy, cfg, rng);

  CHECK(res.n_train + res.n_holdout == 4000);
  CHECK(res.n_holdout >= 350);  // ~10%
  CHECK(res.holdout_mse < 0.01);

  // Spot-check the learned map against the generating rule.
  const auto p_hi = forward(res.net, std::vector<double>{0.2, 0.9, 0.1, 0.4, 0.5});
  CHECK(p_hi[0] == doctest::Approx(0.5).epsilon(0.15));
  CHECK(p_hi[2] == doctest::Approx(0.5).epsilon(0.15));
  const auto p_lo = forward(res.net, std::vector<double>{0.2, 0.1, 0.1, 0.4, 0.5});
  CHECK(p_lo[0] == doctest::Approx(0.5).epsilon(0.15));
  CHECK(p_lo[1] == doctest::Approx(0.5).epsilon(0.15));

  // And the distilled net plugs into the filter as a valid model.
  GameConfig env;
  DenseNet enemy_net = res.net;
  DenseNet ally_net = res.net;
  const OpponentModelSet models =
      OpponentModelSet::from_nets(std::move(ally_net), std::move(enemy_net), env);
  OpponentContext ctx;
  ctx.protagonist_pos = {2, 2};
  ctx.opponent_pos = {6, 3};
  ctx.step = 4;
  const auto dist = models.evaluate(AgentType::Enemy, ctx);
  double sum = 0;
  for (double v : dist) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("distilling against constant targets drives holdout error to zero") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  ReplayBuffer buf(5000);
  for (int i = 0; i < 1500; ++i) {
    std::vector<double> x(kOpponentInputDim);
    for (auto& v : x) v = u(rng);
    buf.append(opp_transition(AgentType::Ally, std::move(x), {0.1, 0.2, 0.3, 0.4}));
  }
  DistillConfig cfg;
  cfg.steps = 1500;
  cfg.hidden = {16};
  const DistillResult res = distill(buf, AgentType::Ally, cfg, rng);
  CHECK(res.holdout_mse < 1e-3);
  const auto p = forward(res.net, std::vector<double>{0.5, 0.5, 0.5, 0.5, 0.5});
  CHECK(p[3] == doctest::Approx(0.4).epsilon(0.1));
}
