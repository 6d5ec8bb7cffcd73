#include "aiig/trainer.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

namespace aiig {

namespace {

std::string hexfloat(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_double_meta(const std::map<std::string, std::string>& meta, const std::string& key,
                         double fallback) {
  auto it = meta.find(key);
  return it == meta.end() ? fallback : std::strtod(it->second.c_str(), nullptr);
}

long parse_long_meta(const std::map<std::string, std::string>& meta, const std::string& key,
                     long fallback) {
  auto it = meta.find(key);
  return it == meta.end() ? fallback : std::strtol(it->second.c_str(), nullptr, 10);
}

}  // namespace

TrainerState::TrainerState(const ExperimentConfig& c)
    : cfg(c),
      rng_init(c.seed ^ 0x5DEECE66Dull),
      rng_main(c.seed),
      rng_evo(c.seed ^ 0x9E3779B97F4A7C15ull),
      rng_distill(c.seed ^ 0xD1B54A32D192ED03ull),
      rng_eval(c.seed ^ 0x2545F4914F6CDD1Dull),
      shared(c.ensemble.buffer_capacity),
      pop(make_population(c.population_gammas(), c.env, rng_init)),
      prot(make_protagonist(c, rng_init)),
      models(OpponentModelSet::uniform()) {
  cfg.validate();
}

EpochTelemetry TrainerState::run_epoch(Population& p) {
  EpochTelemetry tel;
  tel.report =
      self_play_epoch(*prot, p, shared, cfg.env, cfg.ensemble, cfg.learner, models, rng_main);
  if (cfg.evolution_active() && cfg.ensemble.evo_population > 0) {
    tel.evo = evolution_step(p, *prot, shared, cfg.env, cfg.ensemble, cfg.learner, models,
                             rng_evo);
  }
  epoch += 1;
  if (epoch % cfg.ensemble.distill_cadence_epochs == 0) {
    if (auto m = try_distill_models(shared, cfg.ensemble.distill, cfg.env, rng_distill,
                                    &tel.distill_results)) {
      models = std::move(*m);
      model_nets = {tel.distill_results[0].net, tel.distill_results[1].net};
      tel.distilled = true;
    } else {
      tel.distill_skipped = true;
    }
  }
  return tel;
}

std::unique_ptr<ProtagonistLearnerIface> make_protagonist(const ExperimentConfig& cfg,
                                                          std::mt19937_64& init_rng) {
  if (cfg.mode == PolicyMode::Belief) {
    return std::make_unique<BeliefProtagonistLearner>(cfg.env, cfg.learner, init_rng);
  }
  return std::make_unique<RecurrentProtagonistLearner>(cfg.learner, cfg.recurrent, init_rng);
}

std::unique_ptr<ProtagonistLearnerIface> load_protagonist(const Checkpoint& ckpt,
                                                          const ExperimentConfig& cfg) {
  const auto it = ckpt.meta.find("protagonist_mode");
  if (it == ckpt.meta.end()) {
    throw std::runtime_error("protagonist checkpoint lacks a protagonist_mode entry");
  }
  if (it->second == "belief") {
    return std::make_unique<BeliefProtagonistLearner>(
        cfg.learner,
        ActorCritic::from_nets(ckpt.get_dense("actor"), ckpt.get_dense("q1"),
                               ckpt.get_dense("q2"), ckpt.get_dense("target_actor"),
                               ckpt.get_dense("target_q1"), ckpt.get_dense("target_q2")));
  }
  if (it->second == "recurrent") {
    return std::make_unique<RecurrentProtagonistLearner>(
        cfg.learner, cfg.recurrent,
        RecurrentLearner::from_nets(ckpt.get_recurrent("actor"),
                                    ckpt.get_recurrent("target_actor"), ckpt.get_dense("q1"),
                                    ckpt.get_dense("q2"), ckpt.get_dense("target_q1"),
                                    ckpt.get_dense("target_q2")));
  }
  throw std::runtime_error("unknown protagonist_mode '" + it->second + "' in checkpoint");
}

void save_member_checkpoint(const EnsembleMember& m, const std::filesystem::path& path) {
  Checkpoint ckpt;
  ckpt.meta["member_id"] = std::to_string(m.member_id);
  ckpt.meta["gamma"] = hexfloat(m.gamma);
  ckpt.meta["running_avg"] = hexfloat(m.running_avg);
  ckpt.meta["has_stats"] = m.has_stats ? "1" : "0";
  ckpt.meta["episodes_played"] = std::to_string(m.episodes_played);
  for (int t = 0; t < kNumTypes; ++t) {
    const std::string prefix = type_name(static_cast<AgentType>(t));
    ckpt.meta["train_steps_" + prefix] = std::to_string(m.train_steps[t]);
    ckpt.add_dense(prefix + "-actor", m.ac[t].actor);
    ckpt.add_dense(prefix + "-q1", m.ac[t].q1);
    ckpt.add_dense(prefix + "-q2", m.ac[t].q2);
    ckpt.add_dense(prefix + "-target-actor", m.ac[t].target_actor);
    ckpt.add_dense(prefix + "-target-q1", m.ac[t].target_q1);
    ckpt.add_dense(prefix + "-target-q2", m.ac[t].target_q2);
  }
  save_checkpoint(ckpt, path.string());
}

EnsembleMember load_member_checkpoint(const std::filesystem::path& path) {
  const Checkpoint ckpt = load_checkpoint(path.string());
  EnsembleMember m;
  m.member_id = static_cast<int>(parse_long_meta(ckpt.meta, "member_id", 0));
  m.gamma = parse_double_meta(ckpt.meta, "gamma", 0.99);
  m.running_avg = parse_double_meta(ckpt.meta, "running_avg", 0.0);
  m.has_stats = parse_long_meta(ckpt.meta, "has_stats", 0) != 0;
  m.episodes_played = parse_long_meta(ckpt.meta, "episodes_played", 0);
  for (int t = 0; t < kNumTypes; ++t) {
    const std::string prefix = type_name(static_cast<AgentType>(t));
    m.train_steps[t] = parse_long_meta(ckpt.meta, "train_steps_" + prefix, 0);
    m.ac[t] = ActorCritic::from_nets(
        ckpt.get_dense(prefix + "-actor"), ckpt.get_dense(prefix + "-q1"),
        ckpt.get_dense(prefix + "-q2"), ckpt.get_dense(prefix + "-target-actor"),
        ckpt.get_dense(prefix + "-target-q1"), ckpt.get_dense(prefix + "-target-q2"));
  }
  return m;
}

void save_run_state(const TrainerState& st, const RunPaths& paths) {
  std::filesystem::create_directories(paths.checkpoints());
  std::vector<std::filesystem::path> manifest_files;

  Checkpoint prot_ckpt;
  prot_ckpt.meta["seed"] = std::to_string(st.cfg.seed);
  prot_ckpt.meta["epoch"] = std::to_string(st.epoch);
  st.prot->add_to_checkpoint(prot_ckpt);
  save_checkpoint(prot_ckpt, paths.protagonist_ckpt().string());
  manifest_files.push_back(std::filesystem::path("checkpoints") / "protagonist.ckpt");

  if (st.model_nets) {
    for (int t = 0; t < kNumTypes; ++t) {
      Checkpoint mc;
      mc.meta["type"] = type_name(static_cast<AgentType>(t));
      mc.add_dense("model", (*st.model_nets)[t]);
      save_checkpoint(mc, paths.model_ckpt(static_cast<AgentType>(t)).string());
      manifest_files.push_back(std::filesystem::path("checkpoints") /
                               paths.model_ckpt(static_cast<AgentType>(t)).filename());
    }
  }

  nlohmann::json pj;
  pj["active"] = nlohmann::json::array();
  pj["deactivated"] = nlohmann::json::array();
  auto dump_members = [&](const std::vector<EnsembleMember>& members, const char* key) {
    for (const EnsembleMember& m : members) {
      save_member_checkpoint(m, paths.member_ckpt(m.member_id));
      manifest_files.push_back(std::filesystem::path("checkpoints") /
                               paths.member_ckpt(m.member_id).filename());
      pj[key].push_back({{"member_id", m.member_id},
                         {"gamma", m.gamma},
                         {"running_avg", m.running_avg},
                         {"episodes_played", m.episodes_played}});
    }
  };
  dump_members(st.pop.active, "active");
  dump_members(st.pop.deactivated, "deactivated");
  pj["epoch"] = st.epoch;
  std::ofstream pos(paths.population_json());
  if (!pos) throw std::runtime_error("cannot write " + paths.population_json().string());
  pos << pj.dump(2) << '\n';
  pos.close();

  write_manifest(paths.manifest_txt(), paths.dir, manifest_files);
}

void load_population(const RunPaths& paths, Population& pop) {
  std::ifstream is(paths.population_json());
  if (!is) throw std::runtime_error("cannot open " + paths.population_json().string());
  nlohmann::json pj;
  is >> pj;
  pop.active.clear();
  pop.deactivated.clear();
  for (const auto& entry : pj.at("active")) {
    pop.active.push_back(load_member_checkpoint(paths.member_ckpt(entry.at("member_id"))));
  }
  for (const auto& entry : pj.at("deactivated")) {
    pop.deactivated.push_back(load_member_checkpoint(paths.member_ckpt(entry.at("member_id"))));
  }
}

std::filesystem::path resolve_output_root(const std::string& cli_out,
                                          const ExperimentConfig& cfg) {
  if (const char* env_out = std::getenv("AIIG_OUT"); env_out && *env_out) return env_out;
  if (!cli_out.empty()) return cli_out;
  return cfg.output_dir;
}

std::vector<std::string> metrics_columns(const std::vector<int>& member_ids) {
  std::vector<std::string> cols = {"epoch", "phase", "episodes", "protagonist_return",
                                   "protagonist_stored_return"};
  for (int id : member_ids) cols.push_back("member_return_" + std::to_string(id));
  for (const char* c : {"active_members", "buffer_protagonist", "buffer_opp_ally",
                        "buffer_opp_enemy", "evo_replacements", "distilled", "wall_time_s"}) {
    cols.emplace_back(c);
  }
  return cols;
}

void append_metrics_row(CsvWriter& csv, const TrainerState& st, const EpochTelemetry& tel,
                        const std::vector<int>& member_ids, const std::string& phase,
                        double wall_time_s) {
  std::vector<CsvWriter::Cell> cells;
  cells.emplace_back(static_cast<long>(st.epoch));
  cells.emplace_back(phase);
  cells.emplace_back(tel.report.episodes);
  cells.emplace_back(tel.report.protagonist_state_return_mean);
  cells.emplace_back(tel.report.protagonist_stored_return_mean);
  for (int id : member_ids) {
    const auto it = tel.report.member_return_mean.find(id);
    cells.emplace_back(it == tel.report.member_return_mean.end() ? CsvWriter::Cell(std::string())
                                                                 : CsvWriter::Cell(it->second));
  }
  cells.emplace_back(static_cast<long>(st.pop.k()));
  cells.emplace_back(static_cast<long>(st.shared.protagonist.size()));
  cells.emplace_back(static_cast<long>(st.shared.opponent[0].size()));
  cells.emplace_back(static_cast<long>(st.shared.opponent[1].size()));
  cells.emplace_back(static_cast<long>(tel.evo ? tel.evo->replaced_member_ids.size() : 0));
  cells.emplace_back(tel.distilled ? 1 : 0);
  cells.emplace_back(wall_time_s);
  csv.row(cells);
  std::cout << "[epoch " << st.epoch << " " << phase << "] R_p "
            << format_double(tel.report.protagonist_state_return_mean) << " stored "
            << format_double(tel.report.protagonist_stored_return_mean) << " K " << st.pop.k()
            << (tel.distilled ? " distilled" : "")
            << (tel.distill_skipped ? " distill-skipped(insufficient samples)" : "") << '\n';
}

void write_meta_trace(const std::filesystem::path& path, const AnnealResult& result) {
  CsvWriter csv(path, {"proposal_index", "op", "k_before", "k_after", "rho_old", "rho_new",
                       "temperature", "accepted"});
  for (const AnnealStep& s : result.trace) {
    csv.row({s.index, s.op, s.k_before, s.k_after, s.rho_old, s.rho_new, s.temperature,
             s.accepted ? 1 : 0});
  }
}

void write_eval_reports(const RunPaths& paths, const RobustnessReport& report,
                        const std::vector<EvalEpisodeRow>& rows, const MetaConfig& mcfg,
                        std::uint64_t seed) {
  {
    CsvWriter csv(paths.eval_report_csv(), {"protagonist_return", "opponent_return_enemy",
                                            "active_members", "rho", "episodes", "train_steps",
                                            "eval_gamma", "seed"});
    csv.row({report.r_p, report.r_o, report.k, report.rho, mcfg.eval_episodes,
             static_cast<long>(mcfg.eval_train_steps), mcfg.eval_gamma,
             static_cast<long>(seed)});
  }
  CsvWriter csv(paths.eval_episodes_csv(), {"episode", "opponent_type", "protagonist_return",
                                            "opponent_return", "length", "outcome"});
  for (const EvalEpisodeRow& r : rows) {
    csv.row({r.episode, std::string(type_name(r.type)), r.r_p, r.r_o, r.length,
             std::string(outcome_name(r.outcome))});
  }
}

TrainSummary train_run(const ExperimentConfig& cfg, const std::filesystem::path& out_root) {
  RunPaths paths{out_root / run_dir_name(cfg)};
  std::filesystem::create_directories(paths.checkpoints());
  {
    std::ofstream os(paths.config_json());
    if (!os) throw std::runtime_error("cannot write " + paths.config_json().string());
    os << cfg.to_json().dump(2) << '\n';
  }

  TrainerState st(cfg);
  TrainSummary summary;
  summary.run_dir = paths.dir;

  std::vector<int> member_ids;
  for (const auto& m : st.pop.active) member_ids.push_back(m.member_id);
  CsvWriter metrics(paths.metrics_csv(), metrics_columns(member_ids));

  const auto t0 = std::chrono::steady_clock::now();
  auto wall_time = [&]() -> double {
    if (cfg.deterministic) return 0.0;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  auto write_row = [&](const EpochTelemetry& tel, const std::string& phase) {
    append_metrics_row(metrics, st, tel, member_ids, phase, wall_time());
  };

  try {
    for (int e = 0; e < cfg.epochs; ++e) write_row(st.run_epoch(st.pop), "warmup");
    if (cfg.meta_active()) {
      Evaluator evaluator = [&](Population& p) -> RobustnessReport {
        for (int c = 0; c < cfg.meta.cadence_epochs; ++c) write_row(st.run_epoch(p), "meta");
        return evaluate_ensemble(*st.prot, static_cast<int>(p.k()), cfg.env, st.models, cfg.meta,
                                 cfg.learner, st.rng_eval);
      };
      summary.anneal_result = anneal(st.pop, evaluator, cfg.meta, cfg.meta.proposals,
                                     st.rng_eval);
      write_meta_trace(paths.meta_trace_csv(), *summary.anneal_result);
    }
  } catch (...) {
    // Keep whatever progress exists inspectable, then propagate.
    metrics.flush();
    try {
      save_run_state(st, paths);
    } catch (...) {
    }
    throw;
  }

  if (!st.model_nets) {
    std::array<DistillResult, kNumTypes> results;
    if (auto m = try_distill_models(st.shared, cfg.ensemble.distill, cfg.env, st.rng_distill,
                                    &results)) {
      st.models = std::move(*m);
      st.model_nets = {results[0].net, results[1].net};
    }
  }

  save_run_state(st, paths);

  std::vector<EvalEpisodeRow> rows;
  summary.final_eval = evaluate_ensemble(*st.prot, static_cast<int>(st.pop.k()), cfg.env,
                                         st.models, cfg.meta, cfg.learner, st.rng_eval, &rows);
  write_eval_reports(paths, summary.final_eval, rows, cfg.meta, cfg.seed);
  summary.epochs_run = st.epoch;
  std::cout << "run " << paths.dir.string() << ": rho " << format_double(summary.final_eval.rho)
            << " (R_p " << format_double(summary.final_eval.r_p) << ", R_o "
            << format_double(summary.final_eval.r_o) << ", K " << summary.final_eval.k << ")\n";
  return summary;
}

}  // namespace aiig
