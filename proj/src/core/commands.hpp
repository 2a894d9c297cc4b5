#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "core/config.hpp"

namespace sdt {

struct CommandOptions {
  std::optional<std::uint64_t> seed;  // overrides the config seed
  std::string out_dir;                // empty: config output_dir
  std::string format;                 // empty: config format
  int workers = 1;
  std::vector<std::string> inputs;    // files or directories for fit-efficiency / analyze-histogram
};

struct CommandResult {
  std::vector<std::string> artifacts;
  nlohmann::json summary;
};

const std::vector<std::string>& command_names();

/// True for commands that draw random numbers and therefore need a seed.
bool command_needs_seed(const std::string& name);

/// Runs one batch command and writes its artifacts. Throws sdt::Error; no
/// artifact is written when a command fails.
CommandResult run_command(const std::string& name, const RunConfig& cfg, const CommandOptions& opts);

}  // namespace sdt
