#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace aiig {

// Overrides applied on top of the config file (or the defaults when no file is
// given). The CLI fills these; empty/unset means "leave the config value".
struct TrainOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::string> variant;
  std::optional<double> gamma;  // single_gamma
  std::optional<int> epochs;
  bool deterministic = false;
  std::string out;  // output root
};

int cmd_train(const std::string& config_path, const TrainOverrides& ov);

int cmd_meta(const std::string& run_dir, std::optional<int> proposals,
             std::optional<std::uint64_t> seed, bool deterministic);

int cmd_evaluate(const std::string& run_dir, std::optional<int> episodes,
                 std::optional<long> train_steps, std::optional<std::uint64_t> seed,
                 bool deterministic);

int cmd_trace(const std::string& run_dir, const std::string& opponent,
              const std::string& forced_type, std::uint64_t seed, const std::string& out_file);

int cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_dir);

}  // namespace aiig
