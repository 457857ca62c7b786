// SPDX-License-Identifier: Apache-2.0
//
// stealthrmt: Monte Carlo and asymptotic evaluation of learned stealth attacks.
//
// Exit codes: 0 success, 1 replay mismatch, 2 config error, 3 numeric-domain
// error, 4 I/O error.
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "stealthrmt/commands.hpp"
#include "stealthrmt/error.hpp"
#include "stealthrmt/reports.hpp"

namespace {

using stealthrmt::Error;
using stealthrmt::ErrorKind;
namespace fs = std::filesystem;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnknownKey:
    case ErrorKind::OutOfRange:
    case ErrorKind::InsufficientTrials:
    case ErrorKind::MalformedCase:
    case ErrorKind::NoSlackBus:
    case ErrorKind::DuplicateBusId:
      return 2;
    case ErrorKind::IoError:
      return 4;
    default:
      return 3;
  }
}

struct Flags {
  std::optional<std::string> config_file;
  std::optional<std::string> case_source;
  std::optional<double> decay_r;
  std::optional<double> snr_db;
  std::optional<std::string> beta;
  std::optional<std::uint64_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> replication_l;
  std::optional<std::string> variant;
  std::optional<std::string> form;
  std::string out_dir = ".";
  unsigned threads = 0;
};

void add_experiment_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_file, "JSON config file");
  cmd->add_option("--case", f.case_source, "ieee30, ieee118, or a MATPOWER .m path");
  cmd->add_option("--r", f.decay_r, "Toeplitz decay parameter r in [0,1]");
  cmd->add_option("--snr-db", f.snr_db, "signal-to-noise ratio in dB");
  cmd->add_option("--beta", f.beta, "comma-separated beta grid, e.g. 2,10,30");
  cmd->add_option("--trials", f.trials, "Monte Carlo trials per beta");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--l", f.replication_l, "replication factor for the equivalent form");
  cmd->add_option("--variant", f.variant, "log-det variance: as-printed | squared | real-gaussian");
  cmd->add_option("--form", f.form, "cost form: direct | equivalent");
  cmd->add_option("--out", f.out_dir, "output directory")->capture_default_str();
  cmd->add_option("--threads", f.threads, "worker threads (0 = all cores)");
}

// File values first, then flags on top.
stealthrmt::experiment::ExperimentConfig resolve_config(const Flags& f) {
  nlohmann::json base = nlohmann::json::object();
  if (f.config_file) {
    try {
      base = nlohmann::json::parse(stealthrmt::reports::read_text_file(*f.config_file));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::OutOfRange, std::string("config file is not valid JSON: ") + e.what());
    }
    if (!base.is_object()) throw Error(ErrorKind::OutOfRange, "config file must hold a JSON object");
  }
  if (f.case_source) base["case_source"] = *f.case_source;
  if (f.decay_r) base["decay_r"] = *f.decay_r;
  if (f.snr_db) base["snr_db"] = *f.snr_db;
  if (f.beta) base["beta_grid"] = stealthrmt::reports::parse_beta_list(*f.beta);
  if (f.trials) base["trials"] = *f.trials;
  if (f.seed) base["master_seed"] = *f.seed;
  if (f.replication_l) base["replication_l"] = *f.replication_l;
  if (f.variant) base["logdet_variant"] = *f.variant;
  if (f.form) base["cost_form"] = *f.form;
  return stealthrmt::reports::merge_config({}, base);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learned stealth attacks: Monte Carlo vs. random-matrix asymptotics"};
  app.set_version_flag("--version", std::string(stealthrmt::reports::kToolVersion));
  app.require_subcommand(1);

  Flags flags;
  std::vector<std::pair<std::string, CLI::App*>> experiments;
  for (const char* name : {"ergodic", "variance", "ks-check", "corr-check"}) {
    auto* cmd = app.add_subcommand(name, std::string("run the ") + name + " experiment");
    add_experiment_flags(cmd, flags);
    experiments.emplace_back(name, cmd);
  }

  std::string case_for_summary = "ieee30";
  auto* parse_case = app.add_subcommand("parse-case", "print a grid summary");
  parse_case->add_option("--case", case_for_summary, "ieee30, ieee118, or a MATPOWER .m path")->capture_default_str();

  std::string manifest_path;
  std::optional<std::string> replay_out;
  unsigned replay_threads = 0;
  auto* replay = app.add_subcommand("replay", "re-run from a manifest and compare the CSV byte for byte");
  replay->add_option("manifest", manifest_path, "manifest JSON written by a previous run")->required();
  replay->add_option("--out", replay_out, "also write the regenerated outputs here");
  replay->add_option("--threads", replay_threads, "worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (parse_case->parsed()) {
      std::cout << stealthrmt::commands::describe_case(case_for_summary);
      return 0;
    }
    if (replay->parsed()) {
      std::optional<fs::path> out;
      if (replay_out) out = fs::path(*replay_out);
      auto result = stealthrmt::commands::replay(manifest_path, {replay_threads}, out);
      std::cout << "replay " << result.original_csv.string() << ": " << (result.identical ? "identical" : "MISMATCH")
                << "\n";
      return result.identical ? 0 : 1;
    }
    for (const auto& [name, cmd] : experiments) {
      if (!cmd->parsed()) continue;
      auto config = resolve_config(flags);
      auto output = stealthrmt::commands::execute(name, config, {flags.threads});
      auto manifest = stealthrmt::commands::write_run(flags.out_dir, name, config, output);
      std::cout << output.summary;
      std::cout << "wrote " << (fs::path(flags.out_dir) / output.csv_name).string() << " and " << manifest.string()
                << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
