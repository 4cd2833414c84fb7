#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pmarl/cli/run_config.hpp"

namespace pmarl::cli {

/// A named experiment setting. The communication mode picks the slot count:
/// priority runs get `priority_slots`, round-robin baselines `roundrobin_slots`.
struct ExperimentPreset {
  std::string name;
  std::string description;
  RunConfig base;
  int priority_slots = 1;
  int roundrobin_slots = 1;
};

const std::vector<ExperimentPreset>& presets();

/// nullptr when unknown.
const ExperimentPreset* find_preset(const std::string& name);

/// Complete run config for `mode` (priority when unset). The run name gets a
/// "-<mode>" suffix. Throws ConfigError listing the known presets when
/// `name` is unknown.
RunConfig expand_preset(const std::string& name, std::optional<net::CommMode> mode = std::nullopt);

std::string preset_names();

}  // namespace pmarl::cli
