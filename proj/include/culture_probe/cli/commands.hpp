#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "culture_probe/cli/config.hpp"

namespace cprobe::cli {

struct CommandInfo {
  std::string name;
  std::string help;
  /// Config keys the command reads, each also accepted as a --flag.
  std::vector<std::string> keys;
};

/// Subcommands in pipeline order.
const std::vector<CommandInfo>& commandTable();

/// Keys every subcommand accepts.
const std::vector<std::string>& generalKeys();

/// Runs one subcommand against runDir and records it in the run manifest.
/// Throws ValidationError (exit 1) or IoError (exit 2).
void runCommand(const std::string& name, const Config& config, const std::filesystem::path& runDir);

}  // namespace cprobe::cli
