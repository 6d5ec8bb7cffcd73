#include "aiig/meta.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aiig {

RobustnessReport make_report(double r_p, double r_o, int k, const MetaConfig& cfg) {
  RobustnessReport rep;
  rep.r_p = r_p;
  rep.r_o = r_o;
  rep.k = k;
  rep.rho = -r_p + cfg.lambda1 * r_o + cfg.lambda2 * static_cast<double>(k);
  return rep;
}

const char* proposal_op_name(ProposalOp op) {
  switch (op) {
    case ProposalOp::Pop: return "pop";
    case ProposalOp::Append: return "append";
    case ProposalOp::Exchange: return "exchange";
  }
  return "?";
}

std::optional<Proposal> propose(const Population& pop, std::mt19937_64& rng) {
  if (pop.active.empty()) throw std::logic_error("propose: empty active set");
  std::vector<ProposalOp> valid;
  if (pop.active.size() >= 2) valid.push_back(ProposalOp::Pop);
  if (!pop.deactivated.empty()) {
    valid.push_back(ProposalOp::Append);
    valid.push_back(ProposalOp::Exchange);
  }
  if (valid.empty()) return std::nullopt;

  Proposal p;
  p.op = valid.size() > 1
             ? valid[std::uniform_int_distribution<std::size_t>(0, valid.size() - 1)(rng)]
             : valid[0];
  auto pick = [&rng](std::size_t n) {
    return n > 1 ? std::uniform_int_distribution<std::size_t>(0, n - 1)(rng) : std::size_t{0};
  };
  switch (p.op) {
    case ProposalOp::Pop:
      p.active_idx = pick(pop.active.size());
      break;
    case ProposalOp::Append:
      p.deact_idx = pick(pop.deactivated.size());
      break;
    case ProposalOp::Exchange:
      p.active_idx = pick(pop.active.size());
      p.deact_idx = pick(pop.deactivated.size());
      break;
  }
  return p;
}

void apply_proposal(Population& pop, const Proposal& p) {
  switch (p.op) {
    case ProposalOp::Pop:
      if (pop.active.size() < 2) throw std::logic_error("pop would empty the active set");
      if (p.active_idx >= pop.active.size()) throw std::out_of_range("pop: bad active index");
      pop.deactivated.push_back(std::move(pop.active[p.active_idx]));
      pop.active.erase(pop.active.begin() + static_cast<std::ptrdiff_t>(p.active_idx));
      break;
    case ProposalOp::Append:
      if (p.deact_idx >= pop.deactivated.size()) {
        throw std::out_of_range("append: bad pool index");
      }
      pop.active.push_back(std::move(pop.deactivated[p.deact_idx]));
      pop.deactivated.erase(pop.deactivated.begin() + static_cast<std::ptrdiff_t>(p.deact_idx));
      break;
    case ProposalOp::Exchange:
      if (p.active_idx >= pop.active.size() || p.deact_idx >= pop.deactivated.size()) {
        throw std::out_of_range("exchange: bad index");
      }
      std::swap(pop.active[p.active_idx], pop.deactivated[p.deact_idx]);
      break;
  }
}

void undo_proposal(Population& pop, const Proposal& p) {
  switch (p.op) {
    case ProposalOp::Pop:
      if (pop.deactivated.empty()) throw std::logic_error("undo pop: empty pool");
      pop.active.insert(pop.active.begin() + static_cast<std::ptrdiff_t>(p.active_idx),
                        std::move(pop.deactivated.back()));
      pop.deactivated.pop_back();
      break;
    case ProposalOp::Append:
      if (pop.active.empty()) throw std::logic_error("undo append: empty active set");
      pop.deactivated.insert(pop.deactivated.begin() + static_cast<std::ptrdiff_t>(p.deact_idx),
                             std::move(pop.active.back()));
      pop.active.pop_back();
      break;
    case ProposalOp::Exchange:
      std::swap(pop.active[p.active_idx], pop.deactivated[p.deact_idx]);
      break;
  }
}

bool accept(double rho_old, double rho_new, double temperature, std::mt19937_64& rng) {
  if (temperature <= 0) throw std::invalid_argument("accept: temperature must be positive");
  const double p = std::exp(std::min(0.0, rho_old - rho_new) / temperature);
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

double temperature_at(int proposal_index, const MetaConfig& cfg) {
  return std::max(cfg.T_min, cfg.T0 * std::pow(cfg.decay, static_cast<double>(proposal_index)));
}

AnnealResult anneal(Population& pop, const Evaluator& evaluate, const MetaConfig& cfg,
                    int n_proposals, std::mt19937_64& rng) {
  AnnealResult result;
  RobustnessReport current = evaluate(pop);
  result.initial = current;

  for (int i = 0; i < n_proposals; ++i) {
    const double T = temperature_at(i, cfg);
    const int k_before = static_cast<int>(pop.k());
    std::optional<Proposal> prop = propose(pop, rng);

    AnnealStep row;
    row.index = i;
    row.temperature = T;
    row.k_before = k_before;
    row.rho_old = current.rho;

    if (!prop) {
      row.op = "saturated";
      row.k_after = k_before;
      row.rho_new = current.rho;
      row.accepted = false;
      result.trace.push_back(row);
      continue;
    }

    apply_proposal(pop, *prop);
    RobustnessReport candidate = evaluate(pop);
    const bool acc = accept(current.rho, candidate.rho, T, rng);

    row.op = proposal_op_name(prop->op);
    row.k_after = static_cast<int>(pop.k());
    row.rho_new = candidate.rho;
    row.accepted = acc;
    result.trace.push_back(row);

    if (acc) {
      current = candidate;
    } else {
      undo_proposal(pop, *prop);
    }
  }
  result.final_report = current;
  return result;
}

RobustnessReport evaluate_ensemble(const ProtagonistLearnerIface& prot, int k,
                                   const GameConfig& env, const OpponentModelSet& models,
                                   const MetaConfig& mcfg, const LearnerConfig& lcfg,
                                   std::mt19937_64& rng, std::vector<EvalEpisodeRow>* rows) {
  LearnerConfig probe_cfg = lcfg;
  probe_cfg.gamma = mcfg.eval_gamma;
  EnsembleMember probe = EnsembleMember::make(/*id=*/-1, mcfg.eval_gamma, env, rng);
  SharedReplay buffers(mcfg.eval_buffer_capacity);

  long steps_done = 0;
  while (steps_done < mcfg.eval_train_steps) {
    LearnedOpponent opp(&probe.ac[0], &probe.ac[1], &env, &probe_cfg, /*explore=*/true);
    auto policy = prot.make_policy(/*explore=*/false);
    EpisodeOptions opts;
    opts.opponent_member_id = probe.member_id;
    EpisodeResult ep = run_episode(env, *policy, opp, models, prot.mode(), rng, opts);
    for (const Transition& t : ep.opponent_transitions) {
      buffers.opponent_buffer(ep.opponent_type).append(t);
    }
    for (int s = 0; s < ep.length && steps_done < mcfg.eval_train_steps; ++s) {
      member_train_step(probe, buffers, probe_cfg, rng);
      steps_done += 1;
    }
  }

  double r_p_sum = 0, r_o_enemy_sum = 0;
  int enemy_episodes = 0;
  for (int e = 0; e < mcfg.eval_episodes; ++e) {
    LearnedOpponent opp(&probe.ac[0], &probe.ac[1], &env, &probe_cfg, /*explore=*/false);
    auto policy = prot.make_policy(/*explore=*/false);
    EpisodeOptions opts;
    opts.forced_type = e % 2 == 0 ? AgentType::Ally : AgentType::Enemy;
    opts.opponent_member_id = probe.member_id;
    EpisodeResult ep = run_episode(env, *policy, opp, models, prot.mode(), rng, opts);
    r_p_sum += ep.protagonist_state_return;
    if (ep.opponent_type == AgentType::Enemy) {
      r_o_enemy_sum += ep.opponent_return;
      enemy_episodes += 1;
    }
    if (rows) {
      rows->push_back({e, ep.opponent_type, ep.protagonist_state_return, ep.opponent_return,
                       ep.length, ep.outcome});
    }
  }
  const double r_p = mcfg.eval_episodes > 0 ? r_p_sum / mcfg.eval_episodes : 0.0;
  const double r_o = enemy_episodes > 0 ? r_o_enemy_sum / enemy_episodes : 0.0;
  return make_report(r_p, r_o, k, mcfg);
}

}  // namespace aiig
