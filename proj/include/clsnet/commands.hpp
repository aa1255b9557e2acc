#pragma once

#include <string>
#include <vector>

#include "clsnet/scenario.hpp"

namespace clsnet {

struct CommandResult {
  std::string report;              // JSON written as the command's main record
  std::vector<std::string> files;  // paths written, in order
};

/// Each command writes into config.output_dir (created if missing). Every
/// record carries the config digest and seed.
CommandResult cmd_spectrum(const ScenarioConfig& config);
/// trajectory.csv and summary.json.
CommandResult cmd_simulate(const ScenarioConfig& config);
/// optimize.json, pulses.csv and summary.json. Search mode needs a seed.
CommandResult cmd_optimize(const ScenarioConfig& config);
/// route.json and summary.json.
CommandResult cmd_route(const ScenarioConfig& config);

/// Dispatches on `command`; it must match config.action.
CommandResult run_command(const std::string& command, const ScenarioConfig& config);

/// Trajectory table: header `t,re_0,im_0,...`, one row per sample and
/// `# event <type> t=<time>` before the first row at or after each event.
std::string trajectory_csv(const Trajectory& trajectory);

/// Shortest round-trip decimal form.
std::string format_real(double value);

}  // namespace clsnet
