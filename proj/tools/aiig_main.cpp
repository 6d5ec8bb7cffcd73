#include <CLI11.hpp>
#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "aiig/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"belief-space tag laboratory: train, anneal, evaluate, trace, report"};
  app.require_subcommand(1);

  // train
  std::string train_config;
  aiig::TrainOverrides ov;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode, variant;
  std::optional<double> gamma;
  std::optional<int> epochs;
  auto* train = app.add_subcommand("train", "run one training configuration");
  train->add_option("--config", train_config, "JSON config file (defaults apply when omitted)")
      ->check(CLI::ExistingFile);
  train->add_option("--seed", seed, "override the run seed");
  train->add_option("--mode", mode, "belief or recurrent");
  train->add_option("--variant", variant, "full, no_EO, no_EO_no_CE, or single_gamma");
  train->add_option("--gamma", gamma, "discount for the single_gamma variant");
  train->add_option("--epochs", epochs, "override warmup epoch count");
  train->add_flag("--deterministic", ov.deterministic,
                  "zero wall-clock column so reruns are byte-identical");
  train->add_option("--out", ov.out, "output root (AIIG_OUT takes precedence)");

  // meta
  std::string meta_run;
  std::optional<int> proposals;
  std::optional<std::uint64_t> meta_seed;
  bool meta_det = false;
  auto* meta = app.add_subcommand("meta", "anneal ensemble composition on a finished run");
  meta->add_option("--run", meta_run, "run directory (contains config.json)")
      ->required()
      ->check(CLI::ExistingDirectory);
  meta->add_option("--proposals", proposals, "override proposal count");
  meta->add_option("--seed", meta_seed, "override the seed");
  meta->add_flag("--deterministic", meta_det, "zero wall-clock column");

  // evaluate
  std::string eval_run;
  std::optional<int> eval_episodes;
  std::optional<long> eval_train_steps;
  std::optional<std::uint64_t> eval_seed;
  bool eval_det = false;
  auto* evaluate = app.add_subcommand("evaluate", "robustness-evaluate a finished run");
  evaluate->add_option("--run", eval_run, "run directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  evaluate->add_option("--episodes", eval_episodes, "override evaluation episode count");
  evaluate->add_option("--train-steps", eval_train_steps,
                       "override probe-opponent training budget");
  evaluate->add_option("--seed", eval_seed, "override the seed");
  evaluate->add_flag("--deterministic", eval_det, "documented for symmetry; evaluation has no "
                                                  "wall-clock output");

  // trace
  std::string trace_run, trace_opponent = "rush", trace_type, trace_out;
  std::uint64_t trace_seed = 1;
  auto* trace = app.add_subcommand("trace", "record one greedy episode as JSON lines");
  trace->add_option("--run", trace_run, "run directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  trace->add_option("--opponent", trace_opponent,
                    "rush, deceive, random, or member:<id> (an active ensemble member)");
  trace->add_option("--type", trace_type, "force the hidden type: ally or enemy");
  trace->add_option("--seed", trace_seed, "episode seed");
  trace->add_option("--out", trace_out, "output file (default: inside the run directory)");

  // report
  std::vector<std::string> report_runs;
  std::string report_out;
  auto* report = app.add_subcommand("report", "aggregate several runs into a comparison table");
  report->add_option("runs", report_runs, "run directories")->required()->expected(-1);
  report->add_option("--out", report_out, "directory for report.csv and report.txt");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      ov.seed = seed;
      ov.mode = mode;
      ov.variant = variant;
      ov.gamma = gamma;
      ov.epochs = epochs;
      return aiig::cmd_train(train_config, ov);
    }
    if (*meta) return aiig::cmd_meta(meta_run, proposals, meta_seed, meta_det);
    if (*evaluate) {
      return aiig::cmd_evaluate(eval_run, eval_episodes, eval_train_steps, eval_seed, eval_det);
    }
    if (*trace) return aiig::cmd_trace(trace_run, trace_opponent, trace_type, trace_seed,
                                       trace_out);
    if (*report) return aiig::cmd_report(report_runs, report_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
