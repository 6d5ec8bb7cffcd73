#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "aiig/meta.hpp"

using namespace aiig;

namespace {

Population population_of(int n_active, int n_deact, const GameConfig& env,
                         std::mt19937_64& rng) {
  Population pop;
  int id = 0;
  for (int i = 0; i < n_active; ++i) {
    pop.active.push_back(EnsembleMember::make(id++, 0.99, env, rng));
  }
  for (int i = 0; i < n_deact; ++i) {
    pop.deactivated.push_back(EnsembleMember::make(id++, 0.99, env, rng));
  }
  return pop;
}

std::vector<int> active_ids(const Population& pop) {
  std::vector<int> ids;
  for (const auto& m : pop.active) ids.push_back(m.member_id);
  return ids;
}

std::vector<int> deact_ids(const Population& pop) {
  std::vector<int> ids;
  for (const auto& m : pop.deactivated) ids.push_back(m.member_id);
  return ids;
}

}  // namespace

TEST_CASE("rho combines the three robustness terms with the documented weights") {
  MetaConfig cfg;  // lambda1 = 0.1, lambda2 = 1.0
  const RobustnessReport r = make_report(5.0, -2.0, 4, cfg);
  CHECK(r.rho == doctest::Approx(-5.0 + 0.1 * -2.0 + 1.0 * 4));  // -1.2
  CHECK(r.r_p == doctest::Approx(5.0));
  CHECK(r.k == 4);

  // A bigger ensemble with identical returns scores strictly worse (higher).
  CHECK(make_report(5.0, -2.0, 5, cfg).rho > r.rho);
  // A stronger protagonist scores better (lower).
  CHECK(make_report(6.0, -2.0, 4, cfg).rho < r.rho);
}

TEST_CASE("temperature follows the geometric schedule with a floor") {
  MetaConfig cfg;
  CHECK(temperature_at(0, cfg) == doctest::Approx(30.0));
  CHECK(temperature_at(1, cfg) == doctest::Approx(30.0 * 0.975));
  CHECK(temperature_at(10, cfg) == doctest::Approx(30.0 * std::pow(0.975, 10)));
  CHECK(temperature_at(100000, cfg) == doctest::Approx(cfg.T_min));
}

TEST_CASE("acceptance is certain downhill and Metropolis-distributed uphill") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 100; ++i) CHECK(accept(10.0, 5.0, 1.0, rng));
  for (int i = 0; i < 100; ++i) CHECK(accept(10.0, 10.0, 1.0, rng));

  // Uphill by 1 at T = 2: p = exp(-0.5).
  int yes = 0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) yes += accept(5.0, 6.0, 2.0, rng) ? 1 : 0;
  CHECK(static_cast<double>(yes) / n == doctest::Approx(std::exp(-0.5)).epsilon(0.02));

  CHECK_THROWS_AS(accept(1.0, 2.0, 0.0, rng), std::invalid_argument);
}

TEST_CASE("proposals cover exactly the valid operations") {
  GameConfig env;
  std::mt19937_64 rng(7);

  SUBCASE("k = 1 with an empty pool saturates") {
    Population pop = population_of(1, 0, env, rng);
    CHECK_FALSE(propose(pop, rng).has_value());
  }
  SUBCASE("k = 1 with a pool never pops") {
    Population pop = population_of(1, 2, env, rng);
    std::set<ProposalOp> seen;
    for (int i = 0; i < 200; ++i) seen.insert(propose(pop, rng)->op);
    CHECK(seen.count(ProposalOp::Pop) == 0);
    CHECK(seen.count(ProposalOp::Append) == 1);
    CHECK(seen.count(ProposalOp::Exchange) == 1);
  }
  SUBCASE("an empty pool only pops") {
    Population pop = population_of(3, 0, env, rng);
    for (int i = 0; i < 50; ++i) CHECK(propose(pop, rng)->op == ProposalOp::Pop);
  }
  SUBCASE("a full state reaches all three") {
    Population pop = population_of(3, 2, env, rng);
    std::set<ProposalOp> seen;
    for (int i = 0; i < 300; ++i) seen.insert(propose(pop, rng)->op);
    CHECK(seen.size() == 3);
  }
  SUBCASE("an empty active set is a caller bug") {
    Population pop = population_of(0, 1, env, rng);
    CHECK_THROWS_AS(propose(pop, rng), std::logic_error);
  }
}

TEST_CASE("undo_proposal restores the exact member ordering") {
  GameConfig env;
  std::mt19937_64 rng(9);
  Population pop = population_of(4, 3, env, rng);
  const auto a0 = active_ids(pop);
  const auto d0 = deact_ids(pop);

  std::mt19937_64 prop_rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    const auto p = propose(pop, prop_rng);
    REQUIRE(p.has_value());
    apply_proposal(pop, *p);
    switch (p->op) {
      case ProposalOp::Pop:
        CHECK(pop.k() == 3);
        break;
      case ProposalOp::Append:
        CHECK(pop.k() == 5);
        break;
      case ProposalOp::Exchange:
        CHECK(pop.k() == 4);
        break;
    }
    undo_proposal(pop, *p);
    REQUIRE(active_ids(pop) == a0);
    REQUIRE(deact_ids(pop) == d0);
  }
}

TEST_CASE("annealing prunes members a mock evaluator despises") {
  GameConfig env;
  std::mt19937_64 rng(23);
  Population pop = population_of(4, 0, env, rng);
  MetaConfig cfg;
  cfg.T0 = 1.0;     // cold chain: near-greedy
  cfg.T_min = 0.01;
  cfg.decay = 0.8;

  // Returns depend only on K: the protagonist is pretended equally strong, so
  // rho = -10 + 0.1 * -1 + K and smaller ensembles always win.
  int evals = 0;
  Evaluator ev = [&](Population& p) {
    evals += 1;
    return make_report(10.0, -1.0, static_cast<int>(p.k()), cfg);
  };

  const AnnealResult res = anneal(pop, ev, cfg, 30, rng);
  CHECK(evals == 1 + 30);  // initial + one per proposal
  CHECK(res.trace.size() == 30);
  CHECK(res.initial.k == 4);
  CHECK(res.final_report.k == 1);
  CHECK(pop.k() == 1);
  CHECK(pop.deactivated.size() == 3);
  CHECK(res.final_report.rho < res.initial.rho);

  // Once k = 1 and every member sits in the pool, appends and exchanges remain
  // available, so the chain keeps proposing (no saturation rows).
  for (const auto& step : res.trace) {
    CHECK(step.op != "saturated");
    CHECK(step.temperature == doctest::Approx(temperature_at(step.index, cfg)));
  }

  // The trace's k bookkeeping is self-consistent: k_before tracks the accepted
  // state and k_after records what the proposal would have made it.
  int k = res.initial.k;
  for (const auto& step : res.trace) {
    CHECK(step.k_before == k);
    if (step.accepted) k = step.k_after;
  }
  CHECK(k == 1);
}

TEST_CASE("a hot chain accepts uphill moves a cold chain refuses") {
  GameConfig env;
  std::mt19937_64 rng_hot(5), rng_cold(5);
  MetaConfig hot;
  hot.T0 = 1000.0;
  hot.decay = 1.0;
  hot.T_min = 999.0;
  MetaConfig cold = hot;
  cold.T0 = 1e-6;
  cold.T_min = 1e-9;

  auto count_uphill_accepts = [&](MetaConfig cfg, std::mt19937_64& rng) {
    Population pop = population_of(2, 2, env, rng);
    // Bigger K is better here (rho falls with K), so pops are uphill moves.
    Evaluator ev = [&](Population& p) {
      return make_report(static_cast<double>(2 * p.k()), 0.0, static_cast<int>(p.k()), cfg);
    };
    const AnnealResult res = anneal(pop, ev, cfg, 40, rng);
    int uphill_accepted = 0;
    for (const auto& s : res.trace) {
      if (s.accepted && s.rho_new > s.rho_old) uphill_accepted += 1;
    }
    return uphill_accepted;
  };

  CHECK(count_uphill_accepts(hot, rng_hot) > 0);
  CHECK(count_uphill_accepts(cold, rng_cold) == 0);
}

TEST_CASE("rejection leaves the composition exactly as it was") {
  GameConfig env;
  std::mt19937_64 rng(41);
  Population pop = population_of(3, 1, env, rng);
  const auto a0 = active_ids(pop);
  const auto d0 = deact_ids(pop);
  MetaConfig cfg;
  cfg.T0 = 1e-9;  // reject every uphill move
  cfg.T_min = 1e-12;
  cfg.lambda1 = 0;
  cfg.lambda2 = 0;
  // Any deviation from the starting membership is uphill, exchanges included,
  // so every proposal must be rejected and rolled back.
  Evaluator ev = [&, a0](Population& p) {
    const double penalty = active_ids(p) == a0 ? 0.0 : 1.0;
    return make_report(-penalty, 0.0, static_cast<int>(p.k()), cfg);
  };
  const AnnealResult res = anneal(pop, ev, cfg, 25, rng);
  for (const auto& s : res.trace) CHECK_FALSE(s.accepted);
  CHECK(active_ids(pop) == a0);
  CHECK(deact_ids(pop) == d0);
  CHECK(res.final_report.k == 3);
}

TEST_CASE("annealing saturates gracefully when no proposal is valid") {
  GameConfig env;
  std::mt19937_64 rng(3);
  Population pop = population_of(1, 0, env, rng);
  MetaConfig cfg;
  Evaluator ev = [&](Population& p) {
    return make_report(0.0, 0.0, static_cast<int>(p.k()), cfg);
  };
  const AnnealResult res = anneal(pop, ev, cfg, 5, rng);
  REQUIRE(res.trace.size() == 5);
  for (const auto& s : res.trace) {
    CHECK(s.op == "saturated");
    CHECK_FALSE(s.accepted);
  }
  CHECK(pop.k() == 1);
}
