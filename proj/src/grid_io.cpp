// SPDX-License-Identifier: Apache-2.0
#include "stealthrmt/grid_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "stealthrmt/error.hpp"

namespace stealthrmt::grid {
namespace {

using Table = std::vector<std::vector<double>>;

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorKind::MalformedCase, what); }

// Drops `%` comments while leaving quoted strings intact.
std::string strip_comments(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_quote = false;
  bool in_comment = false;
  for (char c : text) {
    if (in_comment) {
      if (c == '\n') {
        in_comment = false;
        out.push_back(c);
      }
      continue;
    }
    if (c == '\'') in_quote = !in_quote;
    if (c == '\n') in_quote = false;
    if (c == '%' && !in_quote) {
      in_comment = true;
      continue;
    }
    out.push_back(c);
  }
  return out;
}

class Scanner {
 public:
  explicit Scanner(std::string text) : text_(std::move(text)) {}

  // Collects the raw right-hand side of every `mpc.<field> = ...` statement.
  std::map<std::string, std::string> fields() {
    std::map<std::string, std::string> out;
    while (true) {
      skip_space();
      if (pos_ >= text_.size()) break;
      if (starts_with("mpc.")) {
        pos_ += 4;
        std::string name = identifier();
        if (name.empty()) malformed("expected a field name after 'mpc.'");
        skip_space();
        if (pos_ >= text_.size() || text_[pos_] != '=') malformed("expected '=' after mpc." + name);
        ++pos_;
        skip_space();
        out[name] = value(name);
      } else {
        skip_statement();
      }
    }
    return out;
  }

 private:
  bool starts_with(std::string_view s) const { return text_.compare(pos_, s.size(), s) == 0; }

  void skip_space() {
    while (pos_ < text_.size() && (std::isspace(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == ';'))
      ++pos_;
  }

  std::string identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    return text_.substr(start, pos_ - start);
  }

  // Anything that is not an mpc assignment (e.g. the `function` line) ends at
  // the next newline; brackets opened on it must still balance.
  void skip_statement() {
    while (pos_ < text_.size() && text_[pos_] != '\n') {
      char c = text_[pos_];
      if (c == '[' || c == '{') {
        enclosed(c, c == '[' ? ']' : '}', "statement");
      } else if (c == ']' || c == '}') {
        malformed("unbalanced bracket");
      } else {
        ++pos_;
      }
    }
  }

  std::string enclosed(char open, char close, const std::string& name) {
    std::size_t start = ++pos_;
    int depth = 1;
    bool in_quote = false;
    for (; pos_ < text_.size(); ++pos_) {
      char c = text_[pos_];
      if (c == '\'') in_quote = !in_quote;
      if (in_quote) continue;
      if (c == open) ++depth;
      if (c == close && --depth == 0) {
        std::string body = text_.substr(start, pos_ - start);
        ++pos_;
        return body;
      }
      if ((c == ']' || c == '}') && c != close) malformed("unbalanced brackets in mpc." + name);
    }
    malformed("unbalanced brackets in mpc." + name);
  }

  std::string value(const std::string& name) {
    if (pos_ >= text_.size()) malformed("missing value for mpc." + name);
    char c = text_[pos_];
    if (c == '[') return "[" + enclosed('[', ']', name);
    if (c == '{') return "{" + enclosed('{', '}', name);
    std::size_t start = pos_;
    bool in_quote = false;
    while (pos_ < text_.size()) {
      char d = text_[pos_];
      if (d == '\'') in_quote = !in_quote;
      if (!in_quote && (d == ';' || d == '\n')) break;
      if (!in_quote && (d == ']' || d == '}')) malformed("unbalanced bracket in mpc." + name);
      ++pos_;
    }
    return text_.substr(start, pos_ - start);
  }

  std::string text_;
  std::size_t pos_ = 0;
};

double parse_number(std::string_view token, const std::string& where) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) malformed("non-numeric token '" + std::string(token) + "' in " + where);
  return value;
}

Table parse_table(const std::string& raw, const std::string& name) {
  if (raw.empty() || raw.front() != '[') malformed("mpc." + name + " is not a numeric matrix");
  Table rows;
  std::vector<double> row;
  std::string token;
  auto flush_token = [&] {
    if (!token.empty()) {
      row.push_back(parse_number(token, "mpc." + name));
      token.clear();
    }
  };
  auto flush_row = [&] {
    flush_token();
    if (!row.empty()) rows.push_back(std::move(row));
    row.clear();
  };
  for (std::size_t i = 1; i < raw.size(); ++i) {
    char c = raw[i];
    if (c == ';' || c == '\n') {
      flush_row();
    } else if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      flush_token();
    } else if (c == '[' || c == ']' || c == '{' || c == '}' || c == '\'') {
      malformed("unexpected '" + std::string(1, c) + "' inside mpc." + name);
    } else {
      token.push_back(c);
    }
  }
  flush_row();
  for (const auto& r : rows)
    if (r.size() != rows.front().size()) malformed("ragged rows in mpc." + name);
  return rows;
}

int as_id(double value, const std::string& where) {
  if (value != static_cast<double>(static_cast<int>(value))) malformed("non-integer id in " + where);
  return static_cast<int>(value);
}

}  // namespace

std::size_t GridCase::slack_index() const {
  auto it = std::find_if(buses.begin(), buses.end(), [](const Bus& b) { return b.kind == BusKind::Slack; });
  if (it == buses.end()) throw Error(ErrorKind::NoSlackBus, "case has no slack bus");
  return static_cast<std::size_t>(it - buses.begin());
}

std::size_t GridCase::in_service_branch_count() const {
  return static_cast<std::size_t>(
      std::count_if(branches.begin(), branches.end(), [](const Branch& b) { return b.in_service; }));
}

GridCase parse_matpower(std::string_view text) {
  auto fields = Scanner(strip_comments(text)).fields();
  for (const char* required : {"baseMVA", "bus", "branch"})
    if (!fields.contains(required)) malformed(std::string("missing mpc.") + required);

  GridCase grid;
  {
    std::string raw = fields["baseMVA"];
    auto first = raw.find_first_not_of(" \t\r");
    auto last = raw.find_last_not_of(" \t\r");
    if (first == std::string::npos) malformed("empty mpc.baseMVA");
    grid.base_mva = parse_number(std::string_view(raw).substr(first, last - first + 1), "mpc.baseMVA");
  }

  Table bus = parse_table(fields["bus"], "bus");
  if (bus.empty()) malformed("mpc.bus has no rows");
  if (bus.front().size() < 2) malformed("mpc.bus needs at least the bus_i and type columns");
  std::set<int> ids;
  std::size_t slack_count = 0;
  for (const auto& row : bus) {
    Bus b;
    b.id = as_id(row[0], "mpc.bus");
    switch (as_id(row[1], "mpc.bus type")) {
      case 1: b.kind = BusKind::PQ; break;
      case 2: b.kind = BusKind::PV; break;
      case 3:
        b.kind = BusKind::Slack;
        ++slack_count;
        break;
      default: malformed("unsupported bus type for bus " + std::to_string(b.id));
    }
    if (!ids.insert(b.id).second) throw Error(ErrorKind::DuplicateBusId, "bus id " + std::to_string(b.id) + " repeats");
    grid.buses.push_back(b);
  }
  if (slack_count == 0) throw Error(ErrorKind::NoSlackBus, "no bus has type 3");
  if (slack_count > 1) malformed("more than one slack bus");

  Table branch = parse_table(fields["branch"], "branch");
  if (!branch.empty() && branch.front().size() < 4) malformed("mpc.branch needs at least fbus, tbus, r, x");
  for (const auto& row : branch) {
    Branch br;
    br.from_bus = as_id(row[0], "mpc.branch");
    br.to_bus = as_id(row[1], "mpc.branch");
    br.reactance_x = row[3];
    br.tap_ratio = row.size() > 8 ? row[8] : 0.0;
    br.in_service = row.size() > 10 ? row[10] != 0.0 : true;
    if (!ids.contains(br.from_bus) || !ids.contains(br.to_bus))
      malformed("branch " + std::to_string(br.from_bus) + "-" + std::to_string(br.to_bus) + " references an unknown bus");
    grid.branches.push_back(br);
  }
  return grid;
}

GridCase load_matpower_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot read case file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_matpower(buffer.str());
}

std::string to_matpower(const GridCase& grid, std::string_view function_name) {
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  std::ostringstream out;
  out << "function mpc = " << function_name << "\n";
  out << "mpc.version = '2';\n";
  out << "mpc.baseMVA = " << num(grid.base_mva) << ";\n\n";
  out << "%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin\n";
  out << "mpc.bus = [\n";
  for (const auto& b : grid.buses) {
    int type = b.kind == BusKind::Slack ? 3 : b.kind == BusKind::PV ? 2 : 1;
    out << "\t" << b.id << "\t" << type << "\t0\t0\t0\t0\t1\t1\t0\t0\t1\t1.1\t0.9;\n";
  }
  out << "];\n\n";
  out << "%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus\tangmin\tangmax\n";
  out << "mpc.branch = [\n";
  for (const auto& br : grid.branches) {
    out << "\t" << br.from_bus << "\t" << br.to_bus << "\t0\t" << num(br.reactance_x) << "\t0\t0\t0\t0\t"
        << num(br.tap_ratio) << "\t0\t" << (br.in_service ? 1 : 0) << "\t-360\t360;\n";
  }
  out << "];\n";
  return out.str();
}

bool is_connected(const GridCase& grid) {
  if (grid.buses.empty()) return false;
  std::unordered_map<int, std::size_t> index;
  for (std::size_t i = 0; i < grid.buses.size(); ++i) index[grid.buses[i].id] = i;
  std::vector<std::size_t> parent(grid.buses.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = grid.buses.size();
  for (const auto& br : grid.branches) {
    if (!br.in_service) continue;
    auto a = find(index.at(br.from_bus));
    auto b = find(index.at(br.to_bus));
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

std::size_t numerical_rank(const Eigen::MatrixXd& matrix, double relative_tolerance) {
  if (matrix.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(matrix);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  double cutoff = relative_tolerance * s(0);
  return static_cast<std::size_t>((s.array() > cutoff).count());
}

MeasurementModel build_dc_jacobian(const GridCase& grid, const MeasurementSet& set) {
  const std::size_t slack = grid.slack_index();
  const std::size_t bus_count = grid.buses.size();
  std::unordered_map<int, std::size_t> index;
  for (std::size_t i = 0; i < bus_count; ++i) index[grid.buses[i].id] = i;

  // Column of each bus in H; the slack has none.
  std::vector<std::ptrdiff_t> column(bus_count, -1);
  MeasurementModel model;
  for (std::size_t i = 0, c = 0; i < bus_count; ++i) {
    if (i == slack) continue;
    column[i] = static_cast<std::ptrdiff_t>(c++);
    model.state_bus_ids.push_back(grid.buses[i].id);
  }
  model.n = bus_count - 1;

  struct Line {
    std::size_t from, to, branch;
    double b;
  };
  std::vector<Line> lines;
  for (std::size_t k = 0; k < grid.branches.size(); ++k) {
    const auto& br = grid.branches[k];
    if (!br.in_service) continue;
    if (br.reactance_x == 0.0)
      throw Error(ErrorKind::ZeroReactanceBranch,
                  "branch " + std::to_string(br.from_bus) + "-" + std::to_string(br.to_bus) + " has x = 0");
    double b = 1.0 / br.reactance_x;
    if (br.tap_ratio != 0.0) b /= br.tap_ratio;
    lines.push_back({index.at(br.from_bus), index.at(br.to_bus), k, b});
  }

  Eigen::MatrixXd bbus = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(bus_count), static_cast<Eigen::Index>(bus_count));
  for (const auto& l : lines) {
    auto f = static_cast<Eigen::Index>(l.from);
    auto t = static_cast<Eigen::Index>(l.to);
    bbus(f, f) += l.b;
    bbus(t, t) += l.b;
    bbus(f, t) -= l.b;
    bbus(t, f) -= l.b;
  }

  std::vector<std::size_t> injection_rows;
  if (set.kind != MeasurementKind::FlowsOnly) {
    std::set<int> wanted;
    if (set.injection_buses) wanted.insert(set.injection_buses->begin(), set.injection_buses->end());
    for (std::size_t i = 0; i < bus_count; ++i) {
      if (i == slack) continue;
      if (set.injection_buses && !wanted.contains(grid.buses[i].id)) continue;
      injection_rows.push_back(i);
    }
  }
  std::vector<const Line*> flow_rows;
  if (set.kind != MeasurementKind::InjectionsOnly) {
    std::set<std::size_t> wanted;
    if (set.flow_branches) wanted.insert(set.flow_branches->begin(), set.flow_branches->end());
    for (const auto& l : lines)
      if (!set.flow_branches || wanted.contains(l.branch)) flow_rows.push_back(&l);
  }

  model.m = injection_rows.size() + flow_rows.size();
  model.H = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(model.m), static_cast<Eigen::Index>(model.n));
  Eigen::Index row = 0;
  for (std::size_t i : injection_rows) {
    for (std::size_t j = 0; j < bus_count; ++j)
      if (column[j] >= 0) model.H(row, column[j]) = bbus(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    ++row;
  }
  for (const Line* l : flow_rows) {
    if (column[l->from] >= 0) model.H(row, column[l->from]) += l->b;
    if (column[l->to] >= 0) model.H(row, column[l->to]) -= l->b;
    ++row;
  }

  if (model.m < model.n || numerical_rank(model.H) < model.n) {
    std::string why = is_connected(grid) ? "measurement set leaves states unobservable"
                                          : "in-service branch graph is disconnected";
    throw Error(ErrorKind::RankDeficient, why + " (m=" + std::to_string(model.m) + ", n=" + std::to_string(model.n) + ")");
  }
  return model;
}

}  // namespace stealthrmt::grid
