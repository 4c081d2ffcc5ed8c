#pragma once

#include <string>

#include "trap/config.hpp"

namespace trap::runner {

/// One CLI subcommand against an already-loaded config (with any
/// --seed/--out overrides applied). "all" chains
/// train/attack/eval/report.
void run_command(const config::ExperimentConfig& cfg, const std::string& command);

}  // namespace trap::runner
