#include "aiig/belief.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace aiig {

bool Belief::valid(double eps) const {
  double sum = 0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) return false;
    sum += p;
  }
  return std::abs(sum - 1.0) <= eps;
}

Belief uniform_belief() { return Belief{{0.5, 0.5}}; }

Belief point_mass(AgentType t) {
  Belief b{{0.0, 0.0}};
  b.probs[static_cast<int>(t)] = 1.0;
  return b;
}

OpponentContext strip_type(const OpponentObs& obs) {
  return {obs.protagonist_pos, obs.opponent_pos, obs.step};
}

OpponentObs with_type(const OpponentContext& ctx, AgentType t) {
  OpponentObs o;
  o.protagonist_pos = ctx.protagonist_pos;
  o.opponent_pos = ctx.opponent_pos;
  o.own_type = t;
  o.step = ctx.step;
  return o;
}

OpponentModelSet::OpponentModelSet(Policy ally, Policy enemy)
    : policies_{std::move(ally), std::move(enemy)} {
  for (const auto& p : policies_) {
    if (!p) throw std::invalid_argument("OpponentModelSet: empty policy");
  }
}

std::array<double, kNumOpponentActions> OpponentModelSet::evaluate(
    AgentType type, const OpponentContext& ctx) const {
  const auto probs = policies_[static_cast<int>(type)](ctx);
  double sum = 0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw std::runtime_error("opponent model returned an invalid probability");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw std::runtime_error("opponent model distribution sums to " + std::to_string(sum));
  }
  return probs;
}

OpponentModelSet OpponentModelSet::uniform() {
  auto flat = [](const OpponentContext&) {
    return std::array<double, kNumOpponentActions>{0.25, 0.25, 0.25, 0.25};
  };
  return OpponentModelSet(flat, flat);
}

OpponentModelSet OpponentModelSet::scripted(ScriptedKind ally_kind, ScriptedKind enemy_kind,
                                            GameConfig cfg) {
  auto make_policy = [cfg](ScriptedKind kind, AgentType type) -> Policy {
    return [cfg, kind, type](const OpponentContext& ctx) {
      std::array<double, kNumOpponentActions> probs{0, 0, 0, 0};
      if (kind == ScriptedKind::Random) {
        probs.fill(0.25);
        return probs;
      }
      std::mt19937_64 unused(0);  // deterministic kinds never draw
      const OpponentAction a = scripted_opponent(kind, with_type(ctx, type), cfg, unused);
      probs[static_cast<int>(a)] = 1.0;
      return probs;
    };
  };
  return OpponentModelSet(make_policy(ally_kind, AgentType::Ally),
                          make_policy(enemy_kind, AgentType::Enemy));
}

OpponentModelSet OpponentModelSet::from_nets(DenseNet ally, DenseNet enemy, GameConfig cfg) {
  auto make_policy = [cfg](DenseNet net) -> Policy {
    if (net.input_size() != kOpponentInputDim || net.output_size() != kNumOpponentActions ||
        net.head != Head::Softmax) {
      throw std::invalid_argument("opponent model net must be " +
                                  std::to_string(kOpponentInputDim) + "->" +
                                  std::to_string(kNumOpponentActions) + " with a softmax head");
    }
    return [cfg, net = std::move(net)](const OpponentContext& ctx) {
      const std::vector<double> out = forward(net, encode_opponent_input(ctx, cfg));
      std::array<double, kNumOpponentActions> probs{};
      for (int i = 0; i < kNumOpponentActions; ++i) probs[i] = out[i];
      return probs;
    };
  };
  return OpponentModelSet(make_policy(std::move(ally)), make_policy(std::move(enemy)));
}

Belief predict(const Belief& b) { return b; }

Belief update_action(const Belief& b, const OpponentContext& ctx, OpponentAction action,
                     const OpponentModelSet& models) {
  Belief out;
  double norm = 0;
  for (int m = 0; m < kNumTypes; ++m) {
    const auto probs = models.evaluate(static_cast<AgentType>(m), ctx);
    const double lik = std::max(probs[static_cast<int>(action)], kLikelihoodFloor);
    out.probs[m] = lik * b.probs[m];
    norm += out.probs[m];
  }
  if (norm <= 0) throw std::runtime_error("belief update produced zero normalizer");
  for (double& p : out.probs) p /= norm;
  return out;
}

Belief update_probe(const Belief& b, AgentType reading, double accuracy) {
  if (!(accuracy > 0.5 && accuracy <= 1.0)) {
    throw std::invalid_argument("update_probe: accuracy must lie in (0.5, 1.0]");
  }
  Belief out;
  double norm = 0;
  for (int m = 0; m < kNumTypes; ++m) {
    const double lik = static_cast<AgentType>(m) == reading ? accuracy : 1.0 - accuracy;
    out.probs[m] = lik * b.probs[m];
    norm += out.probs[m];
  }
  if (norm <= 0) throw std::runtime_error("probe update produced zero normalizer");
  for (double& p : out.probs) p /= norm;
  return out;
}

double belief_reward(const Belief& b, const OutcomeFlags& flags, const GameConfig& cfg) {
  double r = 0;
  for (int m = 0; m < kNumTypes; ++m) {
    r += b.probs[m] * protagonist_reward_given_type(flags, static_cast<AgentType>(m), cfg);
  }
  return r;
}

std::vector<double> encode_protagonist_input(const ProtagonistObs& obs, const Belief& b,
                                             const GameConfig& cfg) {
  return {obs.protagonist_pos.x / cfg.world_size,
          obs.protagonist_pos.y / cfg.world_size,
          obs.opponent_pos.x / cfg.world_size,
          obs.opponent_pos.y / cfg.world_size,
          b.enemy(),
          obs.probe_count / 10.0,
          static_cast<double>(obs.step) / cfg.max_steps};
}

std::vector<double> encode_opponent_input(const OpponentContext& ctx, const GameConfig& cfg) {
  return {ctx.protagonist_pos.x / cfg.world_size, ctx.protagonist_pos.y / cfg.world_size,
          ctx.opponent_pos.x / cfg.world_size, ctx.opponent_pos.y / cfg.world_size,
          static_cast<double>(ctx.step) / cfg.max_steps};
}

std::vector<double> encode_protagonist_raw(const ProtagonistObs& obs, const GameConfig& cfg) {
  std::vector<double> f(kProtagonistRawDim, 0.0);
  f[0] = obs.protagonist_pos.x / cfg.world_size;
  f[1] = obs.protagonist_pos.y / cfg.world_size;
  f[2] = obs.opponent_pos.x / cfg.world_size;
  f[3] = obs.opponent_pos.y / cfg.world_size;
  if (obs.last_opponent_action) f[4 + static_cast<int>(*obs.last_opponent_action)] = 1.0;
  if (obs.probe_reading) f[8 + static_cast<int>(*obs.probe_reading)] = 1.0;
  f[10] = obs.probe_count / 10.0;
  f[11] = static_cast<double>(obs.step) / cfg.max_steps;
  return f;
}

}  // namespace aiig
