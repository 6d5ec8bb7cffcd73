#pragma once

#include <filesystem>
#include <memory>
#include <optional>

#include "aiig/config.hpp"
#include "aiig/meta.hpp"
#include "aiig/run_io.hpp"

namespace aiig {

struct RunPaths {
  std::filesystem::path dir;

  std::filesystem::path config_json() const { return dir / "config.json"; }
  std::filesystem::path metrics_csv() const { return dir / "metrics.csv"; }
  std::filesystem::path metrics_meta_csv() const { return dir / "metrics_meta.csv"; }
  std::filesystem::path meta_trace_csv() const { return dir / "meta_trace.csv"; }
  std::filesystem::path checkpoints() const { return dir / "checkpoints"; }
  std::filesystem::path protagonist_ckpt() const { return checkpoints() / "protagonist.ckpt"; }
  std::filesystem::path model_ckpt(AgentType t) const {
    return checkpoints() / (std::string("model-type-") + type_name(t) + ".ckpt");
  }
  std::filesystem::path member_ckpt(int id) const {
    return checkpoints() / ("member-" + std::to_string(id) + ".ckpt");
  }
  std::filesystem::path population_json() const { return dir / "population.json"; }
  std::filesystem::path manifest_txt() const { return dir / "manifest.txt"; }
  std::filesystem::path eval_report_csv() const { return dir / "eval_report.csv"; }
  std::filesystem::path eval_episodes_csv() const { return dir / "eval_episodes.csv"; }
};

struct EpochTelemetry {
  EpochReport report;
  std::optional<EvolutionReport> evo;
  bool distilled = false;
  bool distill_skipped = false;  // cadence hit but data was insufficient
  std::array<DistillResult, kNumTypes> distill_results;
};

// Live state of one training run; shared by `train` and the meta command.
struct TrainerState {
  ExperimentConfig cfg;
  std::mt19937_64 rng_init, rng_main, rng_evo, rng_distill, rng_eval;
  SharedReplay shared;
  Population pop;
  std::unique_ptr<ProtagonistLearnerIface> prot;
  OpponentModelSet models;
  std::optional<std::array<DenseNet, kNumTypes>> model_nets;  // latest distilled nets
  int epoch = 0;

  explicit TrainerState(const ExperimentConfig& cfg);

  // One self-play epoch on `p`, evolution when active, distillation on cadence.
  EpochTelemetry run_epoch(Population& p);
};

std::unique_ptr<ProtagonistLearnerIface> make_protagonist(const ExperimentConfig& cfg,
                                                          std::mt19937_64& init_rng);
std::unique_ptr<ProtagonistLearnerIface> load_protagonist(const Checkpoint& ckpt,
                                                          const ExperimentConfig& cfg);

void save_member_checkpoint(const EnsembleMember& m, const std::filesystem::path& path);
EnsembleMember load_member_checkpoint(const std::filesystem::path& path);

// checkpoints/ + population.json + manifest.txt; every member (active and
// deactivated) gets a file.
void save_run_state(const TrainerState& st, const RunPaths& paths);
void load_population(const RunPaths& paths, Population& pop);

struct TrainSummary {
  std::filesystem::path run_dir;
  int epochs_run = 0;
  std::optional<AnnealResult> anneal_result;
  RobustnessReport final_eval;
};

// Full training pipeline: warmup epochs, annealing when the variant calls for
// it, final distillation, checkpoints + manifest, and a robustness evaluation.
TrainSummary train_run(const ExperimentConfig& cfg, const std::filesystem::path& out_root);

// Root precedence: AIIG_OUT environment variable, then --out, then the config.
std::filesystem::path resolve_output_root(const std::string& cli_out,
                                          const ExperimentConfig& cfg);

std::vector<std::string> metrics_columns(const std::vector<int>& member_ids);
void append_metrics_row(CsvWriter& csv, const TrainerState& st, const EpochTelemetry& tel,
                        const std::vector<int>& member_ids, const std::string& phase,
                        double wall_time_s);

void write_meta_trace(const std::filesystem::path& path, const AnnealResult& result);
void write_eval_reports(const RunPaths& paths, const RobustnessReport& report,
                        const std::vector<EvalEpisodeRow>& rows, const MetaConfig& mcfg,
                        std::uint64_t seed);

}  // namespace aiig
