// SPDX-License-Identifier: Apache-2.0
#include "stealthrmt/commands.hpp"

#include <sstream>

#include "stealthrmt/error.hpp"
#include "stealthrmt/grid_io.hpp"

namespace stealthrmt::commands {
namespace {

namespace fs = std::filesystem;
using reports::format_real;

std::string file_stem(std::string_view command) {
  std::string stem(command);
  for (char& c : stem)
    if (c == '-') c = '_';
  return stem;
}

CommandOutput monte_carlo(std::string_view command, const experiment::ExperimentConfig& config,
                          const experiment::RunOptions& options) {
  const bool variance = command == "variance";
  auto report = variance ? experiment::run_variance_experiment(config, options)
                         : experiment::run_ergodic_experiment(config, options);
  CommandOutput out;
  const std::string stem = file_stem(command);
  out.csv_name = stem + ".csv";
  out.files[out.csv_name] = reports::format_csv(report);
  out.files[stem + ".gp"] =
      reports::format_plot_script(variance ? reports::PlotView::Variance : reports::PlotView::Ergodic, out.csv_name);

  std::ostringstream s;
  const double n = static_cast<double>(report.n_state);
  s << "case " << config.case_source << ": n = " << report.n_state << ", m = " << report.m
    << ", alpha = n/m = " << format_real(report.alpha) << ", form = " << experiment::to_string(config.cost_form)
    << ", trials = " << config.trials << "\n";
  s << "optimal cost per state = " << format_real(report.perfect_cost_per_state) << "\n";
  for (const auto& r : report.per_beta) {
    s << "beta " << format_real(r.beta) << " (k = " << r.k << "): ";
    if (variance) {
      s << "var[F] = " << format_real(r.variance) << " (var[F/n] = " << format_real(r.variance / (n * n))
        << "), bounds [" << format_real(r.asymptotic.var_lower) << ", " << format_real(r.asymptotic.var_upper)
        << "], gap cap " << format_real(r.asymptotic.gap_bound);
      if (r.variance_check)
        s << ", 95% CI [" << format_real(r.variance_check->ci_low) << ", " << format_real(r.variance_check->ci_high)
          << "] " << (r.variance_check->inside ? "inside" : "OUTSIDE");
      s << " (" << rmt::to_string(r.asymptotic.logdet_variant) << ")";
    } else {
      s << "MC mean F/n = " << format_real(r.mean / n) << " +- " << format_real(r.std_error / n)
        << ", asymptotic = " << format_real(r.asymptotic.ergodic_mean);
    }
    if (r.fa_fb_correlation) s << ", corr(F_a, F_b) = " << format_real(*r.fa_fb_correlation);
    s << "\n";
  }
  out.summary = s.str();
  return out;
}

CommandOutput ks_check(const experiment::ExperimentConfig& config, const experiment::RunOptions& options) {
  config.validate();
  auto setup = experiment::load_setup(config);
  CommandOutput out;
  out.csv_name = "ks_check.csv";
  std::ostringstream csv, s;
  csv << "beta,trials,ks_statistic,p_value\n";
  for (double beta : config.beta_grid) {
    auto r = experiment::distribution_equivalence_check(setup, beta, config.trials, config.master_seed, options);
    csv << format_real(beta) << ',' << config.trials << ',' << format_real(r.statistic) << ','
        << format_real(r.p_value) << "\n";
    s << "beta " << format_real(beta) << ": KS D = " << format_real(r.statistic) << ", p = " << format_real(r.p_value)
      << (r.p_value > 0.01 ? " (same law at 1%)" : " (REJECTED at 1%)") << "\n";
  }
  out.files[out.csv_name] = csv.str();
  out.summary = s.str();
  return out;
}

CommandOutput corr_check(const experiment::ExperimentConfig& config, const experiment::RunOptions& options) {
  config.validate();
  auto setup = experiment::load_setup(config);
  CommandOutput out;
  out.csv_name = "corr_check.csv";
  std::ostringstream csv, s;
  csv << "beta,trials,replication_l,rho,note\n";
  for (double beta : config.beta_grid) {
    auto r = experiment::correlation_check(setup.profile, beta, config.trials, config.master_seed,
                                           config.replication_l, options);
    csv << format_real(beta) << ',' << config.trials << ',' << config.replication_l << ',' << format_real(r.rho) << ','
        << (r.degenerate ? "DegenerateSamples" : "") << "\n";
    s << "beta " << format_real(beta) << ": corr(F_a, F_b) = " << format_real(r.rho);
    if (r.degenerate) s << " [" << r.note << "]";
    s << "\n";
  }
  out.files[out.csv_name] = csv.str();
  out.summary = s.str();
  return out;
}

}  // namespace

bool is_experiment_command(std::string_view command) {
  return command == "ergodic" || command == "variance" || command == "ks-check" || command == "corr-check";
}

CommandOutput execute(std::string_view command, const experiment::ExperimentConfig& config,
                      const experiment::RunOptions& options) {
  if (command == "ergodic" || command == "variance") return monte_carlo(command, config, options);
  if (command == "ks-check") return ks_check(config, options);
  if (command == "corr-check") return corr_check(config, options);
  throw Error(ErrorKind::OutOfRange, "command: unknown experiment '" + std::string(command) + "'");
}

fs::path write_run(const fs::path& out_dir, std::string_view command, const experiment::ExperimentConfig& config,
                   const CommandOutput& output) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + out_dir.string() + ": " + ec.message());
  reports::RunManifest manifest;
  manifest.command = std::string(command);
  manifest.config = config;
  manifest.timestamp = reports::current_timestamp();
  for (const auto& [name, contents] : output.files) {
    reports::write_text_file(out_dir / name, contents);
    manifest.outputs[name == output.csv_name ? "csv" : name.ends_with(".gp") ? "plot_script" : name] = name;
  }
  fs::path manifest_path = out_dir / (file_stem(command) + ".manifest.json");
  reports::write_text_file(manifest_path, manifest.to_json().dump(2) + "\n");
  return manifest_path;
}

ReplayResult replay(const fs::path& manifest_path, const experiment::RunOptions& options,
                    const std::optional<fs::path>& out_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(reports::read_text_file(manifest_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::OutOfRange, std::string("manifest is not valid JSON: ") + e.what());
  }
  auto manifest = reports::RunManifest::from_json(j);
  if (!is_experiment_command(manifest.command))
    throw Error(ErrorKind::OutOfRange, "manifest command '" + manifest.command + "' cannot be replayed");
  auto it = manifest.outputs.find("csv");
  if (it == manifest.outputs.end()) throw Error(ErrorKind::OutOfRange, "manifest lists no csv output");

  auto output = execute(manifest.command, manifest.config, options);
  ReplayResult result;
  result.original_csv = manifest_path.parent_path() / it->second;
  result.regenerated_csv = output.files.at(output.csv_name);
  result.identical = reports::read_text_file(result.original_csv) == result.regenerated_csv;
  if (out_dir) write_run(*out_dir, manifest.command, manifest.config, output);
  return result;
}

std::string describe_case(const std::string& case_source) {
  auto grid = grid::load_matpower_file(experiment::resolve_case_path(case_source));
  std::ostringstream s;
  s << "case: " << case_source << "\n";
  s << "base MVA: " << format_real(grid.base_mva) << "\n";
  s << "buses: " << grid.buses.size() << " (slack bus " << grid.buses[grid.slack_index()].id << ")\n";
  s << "branches: " << grid.branches.size() << " (" << grid.in_service_branch_count() << " in service)\n";
  s << "connected: " << (grid::is_connected(grid) ? "yes" : "no") << "\n";
  auto model = grid::build_dc_jacobian(grid);
  s << "states n: " << model.n << "\n";
  s << "measurements m: " << model.m << " (injections + flows)\n";
  s << "rank(H): " << grid::numerical_rank(model.H) << "\n";
  return s.str();
}

}  // namespace stealthrmt::commands
