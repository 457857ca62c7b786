// SPDX-License-Identifier: Apache-2.0
//
// Config ingestion and result serialization for the command-line tool.
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "stealthrmt/experiment.hpp"

namespace stealthrmt::reports {

inline constexpr std::string_view kToolVersion = "0.1.0";

inline constexpr std::string_view kCsvHeader =
    "beta,k,trials,mc_mean,mc_std_err,asymptotic_mean,perfect_cost,mc_variance,var_lower,var_upper,gap_bound,variant";

/// Reads a JSON object over the defaults. Keys are the ExperimentConfig
/// field names; anything else is UnknownKey, bad values are OutOfRange.
experiment::ExperimentConfig parse_config(std::string_view json_text);

/// Same, starting from `base` instead of the defaults.
experiment::ExperimentConfig merge_config(experiment::ExperimentConfig base, const nlohmann::json& overrides);

nlohmann::json config_to_json(const experiment::ExperimentConfig& config);

/// Comma-separated betas, e.g. "2,10,30".
std::vector<double> parse_beta_list(std::string_view text);

/// %.12g, with "nan" for NaN.
std::string format_real(double value);

/// The CSV text for a report: header plus one row per beta. mc_mean,
/// mc_std_err, asymptotic_mean and perfect_cost are per state; mc_variance
/// and the bounds refer to the unnormalized F.
std::string format_csv(const experiment::MonteCarloReport& report);

/// Parses text produced by format_csv back into rows keyed by column name.
std::vector<std::map<std::string, std::string>> parse_csv(std::string_view text);

void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

void emit_csv(const experiment::MonteCarloReport& report, const std::filesystem::path& path);

enum class PlotView { Ergodic, Variance };

/// Gnuplot script reading `csv_name` relative to its own directory.
std::string format_plot_script(PlotView view, std::string_view csv_name);

void emit_plot_script(PlotView view, std::string_view csv_name, const std::filesystem::path& path);

struct RunManifest {
  std::string command;
  experiment::ExperimentConfig config;
  std::string tool_version{kToolVersion};
  std::string timestamp;
  std::map<std::string, std::string> outputs;  // role -> file name relative to the manifest

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

/// UTC, ISO 8601.
std::string current_timestamp();

}  // namespace stealthrmt::reports
