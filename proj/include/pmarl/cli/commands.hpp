#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pmarl/cli/run_config.hpp"

namespace pmarl::cli {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitConfig = 2, kExitNumeric = 3 };

/// Environment variable naming the default output root.
inline constexpr const char* kOutputRootVar = "PMARL_OUTPUT_ROOT";

/// Defaults with output_dir taken from PMARL_OUTPUT_ROOT when set.
RunConfig default_run_config();

struct TrainArgs {
  std::optional<std::string> preset;
  std::optional<std::string> config_path;
  std::optional<std::string> mode;
  std::optional<std::string> seeds;
  std::vector<std::string> overrides;
  std::optional<std::string> output_dir;
  std::optional<std::string> run_name;
};

/// Preset or config file, then --mode, then --set overrides in order, then
/// --seeds/--out/--name. Throws ConfigError on invalid input.
RunConfig resolve_train_config(const TrainArgs& args);

/// <output_dir>/<run_name>/seed_<s>
std::string seed_dir(const RunConfig& config, std::uint64_t seed);

/// One training run per seed. Each seed directory gets config.ini (the
/// resolved snapshot, single seed), metrics.csv, episodes.csv,
/// checkpoint.txt, bandwidth.json, train_summary.json and, when enabled,
/// comm_log.csv.
int cmd_train(const TrainArgs& args, std::ostream& log, std::ostream& err);

struct EvalArgs {
  /// Seed directory written by train; supplies config.ini and checkpoint.txt.
  std::optional<std::string> run_dir;
  std::optional<std::string> config_path;
  std::optional<std::string> checkpoint_path;
  int episodes = 10;
  std::uint64_t seed = 0;
  /// Defaults to run_dir, else the current directory.
  std::optional<std::string> output_dir;
};

/// Writes eval_summary.json and priority_trace.csv.
int cmd_eval(const EvalArgs& args, std::ostream& log, std::ostream& err);

struct PlotArgs {
  std::vector<std::string> inputs;
  std::string output = "learning_curve.svg";
  std::string column = "episode_reward";
  std::string title = "learning curve";
};

/// Mean +-1 std learning curves grouped by run name; also prints the final
/// mean and std of each group.
int cmd_plot(const PlotArgs& args, std::ostream& log, std::ostream& err);

int cmd_presets(std::ostream& log);

/// Maps exceptions to exit codes: configuration/input errors 2, numeric 3.
int run_guarded(const std::function<int()>& body, std::ostream& err);

}  // namespace pmarl::cli
