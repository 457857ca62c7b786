// SPDX-License-Identifier: Apache-2.0
//
// MATPOWER case ingestion and the DC state-estimation measurement Jacobian.
//
// Only the parts of a case that the DC model needs are retained: bus ids and
// types, branch endpoints, series reactance, off-nominal tap ratio and
// in-service status. Everything else in the file (generators, costs, names)
// is skipped.
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace stealthrmt::grid {

enum class BusKind { PQ, PV, Slack };

struct Bus {
  int id = 0;
  BusKind kind = BusKind::PQ;

  bool operator==(const Bus&) const = default;
};

struct Branch {
  int from_bus = 0;
  int to_bus = 0;
  double reactance_x = 0.0;  // per unit
  double tap_ratio = 0.0;    // 0 means nominal (no transformer)
  bool in_service = true;

  bool operator==(const Branch&) const = default;
};

struct GridCase {
  double base_mva = 100.0;
  std::vector<Bus> buses;
  std::vector<Branch> branches;

  bool operator==(const GridCase&) const = default;

  std::size_t slack_index() const;
  std::size_t in_service_branch_count() const;
  /// Number of angle states, i.e. buses minus the slack.
  std::size_t state_count() const { return buses.empty() ? 0 : buses.size() - 1; }
};

/// Parses MATPOWER version-2 case text. Throws Error{MalformedCase, NoSlackBus,
/// DuplicateBusId}.
GridCase parse_matpower(std::string_view text);

/// Reads and parses a case file; IoError when the file cannot be read.
GridCase load_matpower_file(const std::string& path);

/// Writes the bus and branch tables back out in MATPOWER layout. Columns the
/// DC model does not use are filled with neutral values.
std::string to_matpower(const GridCase& grid, std::string_view function_name = "mpc_case");

/// True when the in-service branch graph spans every bus.
bool is_connected(const GridCase& grid);

enum class MeasurementKind { InjectionsOnly, FlowsOnly, InjectionsAndFlows };

/// Which meters exist. When the optional lists are set they restrict the
/// injection buses (by bus id) or the flow branches (by index into
/// GridCase::branches) further.
struct MeasurementSet {
  MeasurementKind kind = MeasurementKind::InjectionsAndFlows;
  std::optional<std::vector<int>> injection_buses;
  std::optional<std::vector<std::size_t>> flow_branches;
};

struct MeasurementModel {
  Eigen::MatrixXd H;  // m x n
  std::size_t m = 0;
  std::size_t n = 0;
  std::optional<double> sigma2;
  std::vector<int> state_bus_ids;  // bus id per column of H
};

/// Relative singular-value tolerance for the full-column-rank check.
inline constexpr double kRankTolerance = 1e-10;

std::size_t numerical_rank(const Eigen::MatrixXd& matrix, double relative_tolerance = kRankTolerance);

/// Builds H with voltage angles at the non-slack buses as states. Branch
/// susceptance is 1/x, divided by the tap ratio when one is set. Injection
/// rows come first (bus order), then flow rows (branch order).
MeasurementModel build_dc_jacobian(const GridCase& grid, const MeasurementSet& set = {});

}  // namespace stealthrmt::grid
