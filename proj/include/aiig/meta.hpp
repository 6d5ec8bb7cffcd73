#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "aiig/ensemble.hpp"

namespace aiig {

// Simulated annealing over the ensemble's composition. A proposal moves one
// member between the active set and the deactivation pool; its effect on the
// robustness score decides acceptance at the current temperature.

struct MetaConfig {
  double lambda1 = 0.1;   // weight on the best-response opponent's return
  double lambda2 = 1.0;   // weight on ensemble size
  double T0 = 30.0;
  double T_min = 0.2;
  double decay = 0.975;   // applied once per proposal
  int proposals = 20;
  int cadence_epochs = 2;        // self-play epochs per proposal in the training evaluator
  long eval_train_steps = 20000; // gradient-step budget for the probe opponent
  int eval_episodes = 200;
  double eval_gamma = 0.99;
  std::size_t eval_buffer_capacity = 50000;
};

struct RobustnessReport {
  double r_p = 0;  // mean protagonist return over evaluation episodes
  double r_o = 0;  // mean probe-opponent return over enemy-type episodes
  int k = 0;
  double rho = 0;  // -r_p + lambda1 * r_o + lambda2 * k (lower is better)
};

RobustnessReport make_report(double r_p, double r_o, int k, const MetaConfig& cfg);

enum class ProposalOp { Pop, Append, Exchange };
const char* proposal_op_name(ProposalOp op);

struct Proposal {
  ProposalOp op = ProposalOp::Pop;
  std::size_t active_idx = 0;  // Pop, Exchange
  std::size_t deact_idx = 0;   // Append, Exchange
};

// Uniform over the valid operations (pop needs k >= 2 so the active set never
// empties; append and exchange need a nonempty pool). nullopt when nothing is
// valid (k == 1 with an empty pool).
std::optional<Proposal> propose(const Population& pop, std::mt19937_64& rng);

void apply_proposal(Population& pop, const Proposal& p);
// Exact positional inverse of apply_proposal.
void undo_proposal(Population& pop, const Proposal& p);

// Metropolis rule: accept with probability exp(min{0, rho_old - rho_new} / T).
bool accept(double rho_old, double rho_new, double temperature, std::mt19937_64& rng);

double temperature_at(int proposal_index, const MetaConfig& cfg);

struct AnnealStep {
  int index = 0;
  std::string op;  // "pop", "append", "exchange", or "saturated"
  int k_before = 0;
  int k_after = 0;
  double rho_old = 0;
  double rho_new = 0;
  double temperature = 0;
  bool accepted = false;
};

struct AnnealResult {
  std::vector<AnnealStep> trace;
  RobustnessReport initial;
  RobustnessReport final_report;
};

// The evaluator measures a composition; it may train the population's members
// (and the protagonist) as a side effect, which rejection does not undo. Only
// the composition change is rolled back.
using Evaluator = std::function<RobustnessReport(Population&)>;

AnnealResult anneal(Population& pop, const Evaluator& evaluate, const MetaConfig& cfg,
                    int n_proposals, std::mt19937_64& rng);

// --- Robustness evaluation against a freshly trained probe opponent ---

struct EvalEpisodeRow {
  int episode = 0;
  AgentType type = AgentType::Ally;
  double r_p = 0;
  double r_o = 0;
  int length = 0;
  Outcome outcome = Outcome::Running;
};

// Trains a fresh learner (gamma = eval_gamma) against the frozen protagonist
// for eval_train_steps gradient steps (interleaved with rollouts roughly 1:1),
// then measures eval_episodes greedy episodes with types alternating so the
// enemy-conditioned mean is over exactly half of them. k is charged to rho.
RobustnessReport evaluate_ensemble(const ProtagonistLearnerIface& prot, int k,
                                   const GameConfig& env, const OpponentModelSet& models,
                                   const MetaConfig& mcfg, const LearnerConfig& lcfg,
                                   std::mt19937_64& rng,
                                   std::vector<EvalEpisodeRow>* rows = nullptr);

}  // namespace aiig
