// SPDX-License-Identifier: Apache-2.0
#include "stealthrmt/reports.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "stealthrmt/error.hpp"

namespace stealthrmt::reports {
namespace {

using nlohmann::json;

[[noreturn]] void bad_value(const std::string& key, const std::string& why) {
  throw Error(ErrorKind::OutOfRange, key + ": " + why);
}

double as_real(const json& v, const std::string& key) {
  if (!v.is_number()) bad_value(key, "expected a number");
  return v.get<double>();
}

std::uint64_t as_count(const json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    if (v.get<std::int64_t>() < 0) bad_value(key, "must be nonnegative");
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  bad_value(key, "expected a nonnegative integer");
}

std::string as_text(const json& v, const std::string& key) {
  if (!v.is_string()) bad_value(key, "expected a string");
  return v.get<std::string>();
}

}  // namespace

experiment::ExperimentConfig merge_config(experiment::ExperimentConfig cfg, const json& overrides) {
  if (!overrides.is_object()) throw Error(ErrorKind::OutOfRange, "config: top level must be a JSON object");
  for (const auto& [key, value] : overrides.items()) {
    if (key == "case_source") {
      cfg.case_source = as_text(value, key);
    } else if (key == "decay_r") {
      cfg.decay_r = as_real(value, key);
    } else if (key == "snr_db") {
      cfg.snr_db = as_real(value, key);
    } else if (key == "beta_grid") {
      if (!value.is_array()) bad_value(key, "expected an array of numbers");
      cfg.beta_grid.clear();
      for (const auto& b : value) cfg.beta_grid.push_back(as_real(b, key));
    } else if (key == "trials") {
      cfg.trials = as_count(value, key);
    } else if (key == "master_seed") {
      cfg.master_seed = as_count(value, key);
    } else if (key == "replication_l") {
      cfg.replication_l = as_count(value, key);
    } else if (key == "logdet_variant") {
      cfg.logdet_variant = rmt::parse_logdet_variant(as_text(value, key));
    } else if (key == "cost_form") {
      cfg.cost_form = experiment::parse_cost_form(as_text(value, key));
    } else {
      throw Error(ErrorKind::UnknownKey, "unrecognized config key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

experiment::ExperimentConfig parse_config(std::string_view json_text) {
  std::string_view trimmed = json_text;
  while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.front()))) trimmed.remove_prefix(1);
  if (trimmed.empty()) return merge_config({}, json::object());
  json parsed;
  try {
    parsed = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::OutOfRange, std::string("config: not valid JSON (") + e.what() + ")");
  }
  return merge_config({}, parsed);
}

json config_to_json(const experiment::ExperimentConfig& c) {
  return json{{"case_source", c.case_source},
              {"decay_r", c.decay_r},
              {"snr_db", c.snr_db},
              {"beta_grid", c.beta_grid},
              {"trials", c.trials},
              {"master_seed", c.master_seed},
              {"replication_l", c.replication_l},
              {"logdet_variant", std::string(rmt::to_string(c.logdet_variant))},
              {"cost_form", std::string(experiment::to_string(c.cost_form))}};
}

std::vector<double> parse_beta_list(std::string_view text) {
  std::vector<double> out;
  while (!text.empty()) {
    auto comma = text.find(',');
    std::string_view item = text.substr(0, comma);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size())
      bad_value("beta_grid", "cannot parse '" + std::string(item) + "'");
    out.push_back(value);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (out.empty()) bad_value("beta_grid", "empty list");
  return out;
}

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

std::string format_csv(const experiment::MonteCarloReport& report) {
  std::ostringstream out;
  out << kCsvHeader << "\n";
  const double n = static_cast<double>(report.n_state);
  for (const auto& r : report.per_beta) {
    out << format_real(r.beta) << ',' << r.k << ',' << r.cost_samples.size() << ',' << format_real(r.mean / n) << ','
        << format_real(r.std_error / n) << ',' << format_real(r.asymptotic.ergodic_mean) << ','
        << format_real(report.perfect_cost_per_state) << ',' << format_real(r.variance) << ','
        << format_real(r.asymptotic.var_lower) << ',' << format_real(r.asymptotic.var_upper) << ','
        << format_real(r.asymptotic.gap_bound) << ',' << rmt::to_string(r.asymptotic.logdet_variant) << "\n";
  }
  return out.str();
}

std::vector<std::map<std::string, std::string>> parse_csv(std::string_view text) {
  auto split = [](std::string_view line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      auto comma = line.find(',', start);
      cells.emplace_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return cells;
  };
  std::vector<std::map<std::string, std::string>> rows;
  std::vector<std::string> header;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (header.empty()) {
      header = std::move(cells);
      continue;
    }
    if (cells.size() != header.size()) throw Error(ErrorKind::IoError, "CSV row width does not match header");
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < cells.size(); ++i) row[header[i]] = cells[i];
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorKind::IoError, "failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void emit_csv(const experiment::MonteCarloReport& report, const std::filesystem::path& path) {
  write_text_file(path, format_csv(report));
}

std::string format_plot_script(PlotView view, std::string_view csv_name) {
  std::ostringstream out;
  out << "# gnuplot script; run from this directory: gnuplot <this file>\n";
  out << "set datafile separator ','\n";
  out << "set key autotitle columnhead\n";
  out << "set key top right\n";
  out << "set logscale x\n";
  out << "set xlabel 'beta = (k-1)/n'\n";
  out << "set terminal pngcairo size 900,600\n";
  if (view == PlotView::Ergodic) {
    out << "set output 'ergodic.png'\n";
    out << "set ylabel 'cost per state (nats)'\n";
    out << "plot '" << csv_name << "' using 'beta':'mc_mean':'mc_std_err' with yerrorbars title 'Monte Carlo', \\\n";
    out << "     '' using 'beta':'asymptotic_mean' with linespoints title 'asymptotic', \\\n";
    out << "     '' using 'beta':'perfect_cost' with lines dashtype 2 title 'optimal (perfect knowledge)'\n";
  } else {
    out << "set output 'variance.png'\n";
    out << "set ylabel 'var[F]'\n";
    out << "set style fill transparent solid 0.25 noborder\n";
    out << "plot '" << csv_name << "' using 'beta':'var_lower':'var_upper' with filledcurves title 'bounds', \\\n";
    out << "     '' using 'beta':'var_lower' with lines title 'lower bound', \\\n";
    out << "     '' using 'beta':'var_upper' with lines title 'upper bound', \\\n";
    out << "     '' using 'beta':'mc_variance' with linespoints title 'Monte Carlo'\n";
  }
  return out.str();
}

void emit_plot_script(PlotView view, std::string_view csv_name, const std::filesystem::path& path) {
  write_text_file(path, format_plot_script(view, csv_name));
}

json RunManifest::to_json() const {
  return json{{"command", command},
              {"config", config_to_json(config)},
              {"tool_version", tool_version},
              {"timestamp", timestamp},
              {"master_seed", config.master_seed},
              {"outputs", outputs}};
}

RunManifest RunManifest::from_json(const json& j) {
  try {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.config = merge_config({}, j.at("config"));
    m.tool_version = j.value("tool_version", std::string(kToolVersion));
    m.timestamp = j.value("timestamp", std::string());
    m.outputs = j.value("outputs", std::map<std::string, std::string>{});
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::OutOfRange, std::string("manifest: ") + e.what());
  }
}

std::string current_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

}  // namespace stealthrmt::reports
