#include "aiig/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aiig {

namespace {

std::array<double, kNumOpponentActions> to_array4(const std::vector<double>& v) {
  std::array<double, kNumOpponentActions> out{};
  for (int i = 0; i < kNumOpponentActions; ++i) out[i] = v[i];
  return out;
}

}  // namespace

// --- Opponent policies ---

LearnedOpponent::LearnedOpponent(const ActorCritic* ally, const ActorCritic* enemy,
                                 const GameConfig* cfg, const LearnerConfig* learner_cfg,
                                 bool explore)
    : ac_{ally, enemy}, cfg_(cfg), learner_cfg_(learner_cfg), explore_(explore) {}

std::pair<OpponentAction, std::array<double, kNumOpponentActions>> LearnedOpponent::act(
    const OpponentObs& obs, std::mt19937_64& rng) {
  const ActorCritic& ac = *ac_[static_cast<int>(obs.own_type)];
  const std::vector<double> features = encode_opponent_input(strip_type(obs), *cfg_);
  const ActResult res = aiig::act(ac, features, explore_, *learner_cfg_, rng);
  return {static_cast<OpponentAction>(res.action), to_array4(policy_probs(ac.actor, features))};
}

ActorOnlyOpponent::ActorOnlyOpponent(const DenseNet* ally_actor, const DenseNet* enemy_actor,
                                     const GameConfig* cfg)
    : actors_{ally_actor, enemy_actor}, cfg_(cfg) {}

std::pair<OpponentAction, std::array<double, kNumOpponentActions>> ActorOnlyOpponent::act(
    const OpponentObs& obs, std::mt19937_64&) {
  const DenseNet& actor = *actors_[static_cast<int>(obs.own_type)];
  const std::vector<double> probs =
      policy_probs(actor, encode_opponent_input(strip_type(obs), *cfg_));
  return {static_cast<OpponentAction>(argmax_index(probs)), to_array4(probs)};
}

std::pair<OpponentAction, std::array<double, kNumOpponentActions>> ScriptedOpponentPolicy::act(
    const OpponentObs& obs, std::mt19937_64& rng) {
  const OpponentAction a = scripted_opponent(kind_, obs, *cfg_, rng);
  std::array<double, kNumOpponentActions> probs{0, 0, 0, 0};
  if (kind_ == ScriptedKind::Random) {
    probs.fill(1.0 / kNumOpponentActions);
  } else {
    probs[static_cast<int>(a)] = 1.0;
  }
  return {a, probs};
}

// --- Protagonist policies ---

std::pair<ProtagonistAction, std::vector<double>> LearnedProtagonist::act(
    std::span<const double> features, std::mt19937_64& rng) {
  const ActResult res = aiig::act(*ac_, features, explore_, *cfg_, rng);
  return {static_cast<ProtagonistAction>(res.action), policy_probs(ac_->actor, features)};
}

RecurrentProtagonist::RecurrentProtagonist(const RecurrentNet* net, const LearnerConfig* cfg,
                                           bool explore)
    : net_(net), cfg_(cfg), explore_(explore), hidden_(net->hidden_size, 0.0) {}

void RecurrentProtagonist::begin_episode() { hidden_.assign(net_->hidden_size, 0.0); }

std::pair<ProtagonistAction, std::vector<double>> RecurrentProtagonist::act(
    std::span<const double> features, std::mt19937_64& rng) {
  hidden_ = gru_step(*net_, features, hidden_);
  std::vector<double> logits = readout_logits(*net_, hidden_);
  const std::vector<double> clean = softmax(logits);
  int action;
  if (explore_) {
    std::normal_distribution<double> noise(0.0, cfg_->exploration_noise_std);
    for (double& v : logits) {
      v += std::clamp(noise(rng), -cfg_->noise_clip, cfg_->noise_clip);
    }
    action = sample_categorical(softmax(logits), rng);
  } else {
    action = argmax_index(clean);
  }
  return {static_cast<ProtagonistAction>(action), clean};
}

std::pair<ProtagonistAction, std::vector<double>> UniformRandomProtagonist::act(
    std::span<const double>, std::mt19937_64& rng) {
  std::vector<double> probs(kNumProtagonistActions, 1.0 / kNumProtagonistActions);
  return {static_cast<ProtagonistAction>(sample_categorical(probs, rng)), probs};
}

std::pair<ProtagonistAction, std::vector<double>> FixedActionProtagonist::act(
    std::span<const double>, std::mt19937_64&) {
  std::vector<double> probs(kNumProtagonistActions, 0.0);
  probs[static_cast<int>(action_)] = 1.0;
  return {action_, probs};
}

// --- Episode runner ---

const char* mode_name(PolicyMode m) { return m == PolicyMode::Belief ? "belief" : "recurrent"; }

PolicyMode mode_from_name(const std::string& name) {
  if (name == "belief") return PolicyMode::Belief;
  if (name == "recurrent") return PolicyMode::Recurrent;
  throw std::invalid_argument("unknown mode: " + name + " (expected belief or recurrent)");
}

EpisodeResult run_episode(const GameConfig& env, ProtagonistPolicy& protagonist,
                          OpponentPolicy& opponent, const OpponentModelSet& models,
                          PolicyMode mode, std::mt19937_64& rng, const EpisodeOptions& opts) {
  ResetResult r =
      opts.forced_type ? reset_with_type(env, *opts.forced_type) : reset(env, rng);
  protagonist.begin_episode();

  EpisodeResult ep;
  ep.opponent_type = r.state.opponent_type;

  Belief b = opts.initial_belief;
  if (!b.valid()) throw std::invalid_argument("run_episode: initial belief is not a distribution");

  TraceStep snapshot;
  snapshot.protagonist_pos = r.state.protagonist_pos;
  snapshot.opponent_pos = r.state.opponent_pos;
  if (mode == PolicyMode::Belief) snapshot.belief = b;
  ep.trace.push_back(snapshot);

  WorldState state = r.state;
  ProtagonistObs obs_p = r.protagonist_obs;
  OpponentObs obs_o = r.opponent_obs;

  auto protagonist_features = [&](const ProtagonistObs& o, const Belief& belief) {
    return mode == PolicyMode::Belief ? encode_protagonist_input(o, belief, env)
                                      : encode_protagonist_raw(o, env);
  };

  const MemberTag prot_tag{Role::Protagonist, state.opponent_type, -1, opts.source};
  const MemberTag opp_tag{Role::Opponent, state.opponent_type, opts.opponent_member_id,
                          opts.source};

  while (!state.done) {
    const std::vector<double> feat_p = protagonist_features(obs_p, b);
    const auto [a_p, probs_p] = protagonist.act(feat_p, rng);
    const OpponentContext ctx = strip_type(obs_o);
    const auto [a_o, probs_o] = opponent.act(obs_o, rng);

    const StepResult sr = step(state, a_p, a_o, env, rng);

    // Belief recursion: predict (identity), condition on the observed opponent
    // action in the pre-step context, then on the probe reading when present.
    Belief b_next = update_action(predict(b), ctx, a_o, models);
    if (sr.protagonist_obs.probe_reading) {
      b_next = update_probe(b_next, *sr.protagonist_obs.probe_reading, env.probe_accuracy);
    }

    const double stored_reward =
        mode == PolicyMode::Belief ? belief_reward(b, sr.flags, env) : sr.protagonist_reward;

    Transition tp;
    tp.input = feat_p;
    tp.action = static_cast<int>(a_p);
    tp.action_probs = probs_p;
    tp.reward = stored_reward;
    tp.next_input = protagonist_features(sr.protagonist_obs, b_next);
    tp.done = sr.done;
    tp.tag = prot_tag;
    ep.protagonist_transitions.push_back(std::move(tp));

    Transition to;
    to.input = encode_opponent_input(ctx, env);
    to.action = static_cast<int>(a_o);
    to.action_probs.assign(probs_o.begin(), probs_o.end());
    to.reward = sr.opponent_reward;
    to.next_input = encode_opponent_input(strip_type(sr.opponent_obs), env);
    to.done = sr.done;
    to.tag = opp_tag;
    ep.opponent_transitions.push_back(std::move(to));

    TraceStep ts;
    ts.step = sr.state.step;
    ts.protagonist_pos = sr.state.protagonist_pos;
    ts.opponent_pos = sr.state.opponent_pos;
    ts.a_p = a_p;
    ts.a_o = a_o;
    ts.r_p = sr.protagonist_reward;
    ts.r_o = sr.opponent_reward;
    ts.probe_reading = sr.protagonist_obs.probe_reading;
    if (mode == PolicyMode::Belief) ts.belief = b_next;
    ep.trace.push_back(ts);

    ep.protagonist_state_return += sr.protagonist_reward;
    ep.protagonist_stored_return += stored_reward;
    ep.opponent_return += sr.opponent_reward;

    state = sr.state;
    obs_p = sr.protagonist_obs;
    obs_o = sr.opponent_obs;
    b = b_next;
  }

  ep.outcome = state.outcome;
  ep.length = state.step;
  return ep;
}

}  // namespace aiig
