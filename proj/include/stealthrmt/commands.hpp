// SPDX-License-Identifier: Apache-2.0
//
// The experiment subcommands as library calls, so that a run and its replay
// go through exactly the same code.
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "stealthrmt/experiment.hpp"
#include "stealthrmt/reports.hpp"

namespace stealthrmt::commands {

struct CommandOutput {
  std::map<std::string, std::string> files;  // file name -> contents
  std::string csv_name;                      // the file replay compares
  std::string summary;                       // human-readable, for stdout
};

/// One of "ergodic", "variance", "ks-check", "corr-check".
CommandOutput execute(std::string_view command, const experiment::ExperimentConfig& config,
                      const experiment::RunOptions& options = {});

bool is_experiment_command(std::string_view command);

/// Writes every output plus `<command>.manifest.json` into `out_dir` and
/// returns the manifest path.
std::filesystem::path write_run(const std::filesystem::path& out_dir, std::string_view command,
                                const experiment::ExperimentConfig& config, const CommandOutput& output);

struct ReplayResult {
  bool identical = false;
  std::filesystem::path original_csv;
  std::string regenerated_csv;
};

/// Re-executes the manifest's command and compares the CSV byte for byte.
/// When `out_dir` is set the regenerated outputs are written there too.
ReplayResult replay(const std::filesystem::path& manifest_path, const experiment::RunOptions& options = {},
                    const std::optional<std::filesystem::path>& out_dir = std::nullopt);

/// One-paragraph description of a case and its default measurement model.
std::string describe_case(const std::string& case_source);

}  // namespace stealthrmt::commands
