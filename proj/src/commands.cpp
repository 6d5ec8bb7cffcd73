#include "aiig/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "aiig/trainer.hpp"

namespace aiig {

namespace {

ExperimentConfig config_for_run(const RunPaths& paths) {
  if (!std::filesystem::exists(paths.config_json())) {
    throw std::runtime_error(paths.dir.string() + " has no config.json (not a run directory?)");
  }
  return load_config(paths.config_json());
}

// Rebuilds a TrainerState from a finished run's artifacts: parameters come from
// checkpoints; replay buffers and optimizer moments restart empty (checkpoints
// persist parameters only).
TrainerState restore_state(const RunPaths& paths, const ExperimentConfig& cfg) {
  TrainerState st(cfg);
  load_population(paths, st.pop);
  st.prot = load_protagonist(load_checkpoint(paths.protagonist_ckpt().string()), cfg);
  if (std::filesystem::exists(paths.model_ckpt(AgentType::Ally)) &&
      std::filesystem::exists(paths.model_ckpt(AgentType::Enemy))) {
    DenseNet ally =
        load_checkpoint(paths.model_ckpt(AgentType::Ally).string()).get_dense("model");
    DenseNet enemy =
        load_checkpoint(paths.model_ckpt(AgentType::Enemy).string()).get_dense("model");
    st.model_nets = {ally, enemy};
    st.models = OpponentModelSet::from_nets(std::move(ally), std::move(enemy), cfg.env);
  } else {
    std::cerr << "note: no distilled opponent models in " << paths.checkpoints().string()
              << "; the belief filter falls back to uniform action models\n";
  }
  return st;
}

nlohmann::json vec2_json(Vec2 v) { return nlohmann::json::array({v.x, v.y}); }

nlohmann::json belief_json(const std::optional<Belief>& b) {
  if (!b) return nullptr;
  return nlohmann::json::array({b->probs[0], b->probs[1]});
}

}  // namespace

int cmd_train(const std::string& config_path, const TrainOverrides& ov) {
  ExperimentConfig cfg;
  if (!config_path.empty()) cfg = load_config(config_path);
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.mode) cfg.mode = mode_from_name(*ov.mode);
  if (ov.variant) cfg.variant = variant_from_name(*ov.variant);
  if (ov.gamma) cfg.single_gamma = *ov.gamma;
  if (ov.epochs) cfg.epochs = *ov.epochs;
  if (ov.deterministic) cfg.deterministic = true;
  cfg.validate();

  const TrainSummary summary = train_run(cfg, resolve_output_root(ov.out, cfg));
  std::cout << "artifacts in " << summary.run_dir.string() << '\n';
  return 0;
}

int cmd_meta(const std::string& run_dir, std::optional<int> proposals,
             std::optional<std::uint64_t> seed, bool deterministic) {
  const RunPaths paths{run_dir};
  ExperimentConfig cfg = config_for_run(paths);
  if (seed) cfg.seed = *seed;
  if (proposals) cfg.meta.proposals = *proposals;
  if (deterministic) cfg.deterministic = true;
  if (cfg.meta.proposals <= 0) {
    std::cerr << "meta: nothing to do (proposals = " << cfg.meta.proposals << ")\n";
    return 1;
  }

  TrainerState st = restore_state(paths, cfg);
  std::vector<int> member_ids;
  for (const auto& m : st.pop.active) member_ids.push_back(m.member_id);
  for (const auto& m : st.pop.deactivated) member_ids.push_back(m.member_id);
  std::sort(member_ids.begin(), member_ids.end());
  CsvWriter metrics(paths.metrics_meta_csv(), metrics_columns(member_ids));

  const auto t0 = std::chrono::steady_clock::now();
  Evaluator evaluator = [&](Population& p) -> RobustnessReport {
    for (int c = 0; c < cfg.meta.cadence_epochs; ++c) {
      const EpochTelemetry tel = st.run_epoch(p);
      const double wall =
          cfg.deterministic
              ? 0.0
              : std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      append_metrics_row(metrics, st, tel, member_ids, "meta", wall);
    }
    return evaluate_ensemble(*st.prot, static_cast<int>(p.k()), cfg.env, st.models, cfg.meta,
                             cfg.learner, st.rng_eval);
  };

  const AnnealResult result = anneal(st.pop, evaluator, cfg.meta, cfg.meta.proposals,
                                     st.rng_eval);
  write_meta_trace(paths.meta_trace_csv(), result);
  save_run_state(st, paths);

  std::cout << "annealing: rho " << format_double(result.initial.rho) << " -> "
            << format_double(result.final_report.rho) << ", K " << result.initial.k << " -> "
            << result.final_report.k << " over " << result.trace.size() << " proposals\n"
            << "trace in " << paths.meta_trace_csv().string() << '\n';
  return 0;
}

int cmd_evaluate(const std::string& run_dir, std::optional<int> episodes,
                 std::optional<long> train_steps, std::optional<std::uint64_t> seed,
                 bool deterministic) {
  const RunPaths paths{run_dir};
  ExperimentConfig cfg = config_for_run(paths);
  if (seed) cfg.seed = *seed;
  if (episodes) cfg.meta.eval_episodes = *episodes;
  if (train_steps) cfg.meta.eval_train_steps = *train_steps;
  if (deterministic) cfg.deterministic = true;
  cfg.validate();

  TrainerState st = restore_state(paths, cfg);
  std::vector<EvalEpisodeRow> rows;
  const RobustnessReport report =
      evaluate_ensemble(*st.prot, static_cast<int>(st.pop.k()), cfg.env, st.models, cfg.meta,
                        cfg.learner, st.rng_eval, &rows);
  write_eval_reports(paths, report, rows, cfg.meta, cfg.seed);

  std::cout << "evaluation over " << cfg.meta.eval_episodes << " episodes (probe trained "
            << cfg.meta.eval_train_steps << " steps):\n"
            << "  protagonist return " << format_double(report.r_p) << '\n'
            << "  opponent return (enemy episodes) " << format_double(report.r_o) << '\n'
            << "  active members " << report.k << '\n'
            << "  rho " << format_double(report.rho) << '\n'
            << "reports in " << paths.eval_report_csv().string() << '\n';
  return 0;
}

int cmd_trace(const std::string& run_dir, const std::string& opponent,
              const std::string& forced_type, std::uint64_t seed, const std::string& out_file) {
  const RunPaths paths{run_dir};
  ExperimentConfig cfg = config_for_run(paths);
  TrainerState st = restore_state(paths, cfg);
  std::mt19937_64 rng(seed);

  EpisodeOptions opts;
  if (!forced_type.empty()) {
    if (forced_type == "ally") {
      opts.forced_type = AgentType::Ally;
    } else if (forced_type == "enemy") {
      opts.forced_type = AgentType::Enemy;
    } else {
      throw std::invalid_argument("--type must be ally or enemy, got '" + forced_type + "'");
    }
  }

  std::unique_ptr<OpponentPolicy> opp;
  const EnsembleMember* member = nullptr;
  if (opponent.rfind("member:", 0) == 0) {
    const int id = std::stoi(opponent.substr(7));
    member = st.pop.find_active(id);
    if (!member) throw std::invalid_argument("no active member with id " + std::to_string(id));
    opts.opponent_member_id = id;
    opp = std::make_unique<LearnedOpponent>(&member->ac[0], &member->ac[1], &cfg.env,
                                            &cfg.learner, /*explore=*/false);
  } else {
    opp = std::make_unique<ScriptedOpponentPolicy>(scripted_kind_from_name(opponent), &cfg.env);
  }

  auto policy = st.prot->make_policy(/*explore=*/false);
  const EpisodeResult ep = run_episode(cfg.env, *policy, *opp, st.models, cfg.mode, rng, opts);

  std::filesystem::path out = out_file.empty()
                                  ? paths.dir / ("trace-" + opponent + "-seed" +
                                                 std::to_string(seed) + ".jsonl")
                                  : std::filesystem::path(out_file);
  std::ofstream os(out);
  if (!os) throw std::runtime_error("cannot write trace: " + out.string());

  for (std::size_t i = 0; i < ep.trace.size(); ++i) {
    const TraceStep& t = ep.trace[i];
    nlohmann::json line;
    line["step"] = t.step;
    line["protagonist_pos"] = vec2_json(t.protagonist_pos);
    line["opponent_pos"] = vec2_json(t.opponent_pos);
    line["belief"] = belief_json(t.belief);
    if (i == 0) {
      line["kind"] = "snapshot";
      line["mode"] = mode_name(cfg.mode);
      line["opponent"] = opponent;
      line["opponent_type"] = type_name(ep.opponent_type);
      line["seed"] = seed;
    } else {
      line["kind"] = "step";
      line["a_p"] = action_name(*t.a_p);
      line["a_o"] = action_name(*t.a_o);
      line["r_p"] = t.r_p;
      line["r_o"] = t.r_o;
      line["probe_reading"] = t.probe_reading ? nlohmann::json(type_name(*t.probe_reading))
                                              : nlohmann::json(nullptr);
    }
    os << line.dump() << '\n';
  }
  nlohmann::json summary;
  summary["kind"] = "summary";
  summary["outcome"] = outcome_name(ep.outcome);
  summary["length"] = ep.length;
  summary["protagonist_return"] = ep.protagonist_state_return;
  summary["opponent_return"] = ep.opponent_return;
  os << summary.dump() << '\n';

  std::cout << "trace (" << ep.length << " steps, " << outcome_name(ep.outcome) << ") in "
            << out.string() << '\n';
  return 0;
}

namespace {

struct RunRecord {
  std::string mode;
  std::string variant;  // includes gamma suffix for single_gamma runs
  std::uint64_t seed = 0;
  double train_return = std::nan("");
  double eval_r_p = std::nan("");
  double eval_r_o = std::nan("");
  double eval_rho = std::nan("");
};

double mean_ignoring_nan(const std::vector<double>& v) {
  double sum = 0;
  int n = 0;
  for (double x : v) {
    if (!std::isnan(x)) {
      sum += x;
      n += 1;
    }
  }
  return n > 0 ? sum / n : std::nan("");
}

}  // namespace

int cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_dir) {
  std::vector<RunRecord> records;
  for (const std::string& dir : run_dirs) {
    try {
      const RunPaths paths{dir};
      const ExperimentConfig cfg = config_for_run(paths);
      RunRecord rec;
      rec.mode = mode_name(cfg.mode);
      rec.variant = variant_name(cfg.variant);
      if (cfg.variant == Variant::SingleGamma) {
        rec.variant += "_g" + format_double(cfg.single_gamma);
      }
      rec.seed = cfg.seed;

      const CsvTable metrics = read_csv(paths.metrics_csv());
      const int col = metrics.column_index("protagonist_return");
      if (col >= 0 && !metrics.rows.empty()) {
        const std::size_t n = metrics.rows.size();
        const std::size_t tail = std::max<std::size_t>(1, n / 5);  // final 20% of epochs
        double sum = 0;
        for (std::size_t i = n - tail; i < n; ++i) sum += metrics.as_double(i, col);
        rec.train_return = sum / static_cast<double>(tail);
      }
      if (std::filesystem::exists(paths.eval_report_csv())) {
        const CsvTable ev = read_csv(paths.eval_report_csv());
        if (!ev.rows.empty()) {
          rec.eval_r_p = ev.as_double(0, ev.column_index("protagonist_return"));
          rec.eval_r_o = ev.as_double(0, ev.column_index("opponent_return_enemy"));
          rec.eval_rho = ev.as_double(0, ev.column_index("rho"));
        }
      }
      records.push_back(std::move(rec));
    } catch (const std::exception& e) {
      std::cerr << "skipping " << dir << ": " << e.what() << '\n';
    }
  }
  if (records.empty()) {
    std::cerr << "report: no readable runs\n";
    return 1;
  }

  // Aggregate by (mode, variant) over seeds.
  std::map<std::pair<std::string, std::string>, std::vector<RunRecord>> cells;
  for (const RunRecord& r : records) cells[{r.mode, r.variant}].push_back(r);

  const std::filesystem::path root = out_dir.empty() ? "." : out_dir;
  std::filesystem::create_directories(root);
  CsvWriter csv(root / "report.csv",
                {"mode", "variant", "runs", "train_return", "eval_protagonist_return",
                 "eval_opponent_return_enemy", "rho"});
  std::map<std::pair<std::string, std::string>, RunRecord> agg;
  for (const auto& [key, rs] : cells) {
    std::vector<double> train, rp, ro, rho;
    for (const RunRecord& r : rs) {
      train.push_back(r.train_return);
      rp.push_back(r.eval_r_p);
      ro.push_back(r.eval_r_o);
      rho.push_back(r.eval_rho);
    }
    RunRecord a;
    a.train_return = mean_ignoring_nan(train);
    a.eval_r_p = mean_ignoring_nan(rp);
    a.eval_r_o = mean_ignoring_nan(ro);
    a.eval_rho = mean_ignoring_nan(rho);
    agg[key] = a;
    csv.row({key.first, key.second, static_cast<long>(rs.size()), a.train_return, a.eval_r_p,
             a.eval_r_o, a.eval_rho});
  }

  std::ostringstream txt;
  txt << "runs aggregated by (mode, variant); returns are means over seeds\n\n";
  for (const auto& [key, a] : agg) {
    txt << key.first << " / " << key.second << ": train " << format_double(a.train_return)
        << ", eval R_p " << format_double(a.eval_r_p) << ", eval R_o "
        << format_double(a.eval_r_o) << ", rho " << format_double(a.eval_rho) << '\n';
  }
  auto gap_line = [&](const std::string& mode, const char* label, const char* hi,
                      const char* lo) {
    const auto ih = agg.find({mode, hi});
    const auto il = agg.find({mode, lo});
    txt << "  " << label << " (" << hi << " - " << lo << "): ";
    if (ih == agg.end() || il == agg.end() || std::isnan(ih->second.eval_r_p) ||
        std::isnan(il->second.eval_r_p)) {
      txt << "n/a (missing runs)\n";
    } else {
      txt << format_double(ih->second.eval_r_p - il->second.eval_r_p) << " eval return ("
          << format_double(ih->second.train_return - il->second.train_return) << " train)\n";
    }
  };
  std::set<std::string> modes;
  for (const auto& [key, a] : agg) {
    (void)a;
    modes.insert(key.first);
  }
  for (const std::string& mode : modes) {
    txt << '\n' << mode << " gaps:\n";
    gap_line(mode, "ensemble vs single", "full", "no_EO_no_CE");
    gap_line(mode, "annealing contribution", "full", "no_EO");
    gap_line(mode, "ensemble contribution", "no_EO", "no_EO_no_CE");
  }

  std::ofstream ts(root / "report.txt");
  ts << txt.str();
  std::cout << txt.str() << "report.csv and report.txt in " << root.string() << '\n';
  return 0;
}

}  // namespace aiig
