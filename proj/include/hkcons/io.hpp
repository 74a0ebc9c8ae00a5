#pragma once

// Text formats shared by the CLI:
//   state / preference:  "<label> <value>"
//   partition:           "leader <label>" | "follower <label>"
//   leader controls:     "<label> <gain> <offset>"
// '#' lines and blank lines are ignored everywhere.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hkcons/error.hpp"
#include "hkcons/graph.hpp"
#include "hkcons/leader_follow.hpp"

namespace hkcons {

/// Shortest round-trippable-enough decimal: 12 significant digits.
inline std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
  return buf;
}

namespace detail {

inline std::ifstream open_input(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw input_error(std::string("cannot open ") + what + " file '" + path.string() + "'");
  return in;
}

/// Calls fn(fields, line_no) for each non-comment line, split on whitespace.
template <class Fn>
void for_each_record(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::vector<std::string> fields;
    for (std::string f; ss >> f;) fields.push_back(f);
    if (fields.empty() || fields.front().front() == '#') continue;
    fn(fields, line_no);
  }
}

inline std::string where(const std::string& source, std::size_t line_no) {
  return source + ":" + std::to_string(line_no) + ": ";
}

inline double parse_real(const std::string& text, const std::string& at) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !std::isfinite(v)) throw input_error(at + "invalid number '" + text + "'");
  return v;
}

inline node_t lookup(const Graph& g, const std::string& label, const std::string& at) {
  auto idx = g.find(label);
  if (!idx) throw input_error(at + "unknown node '" + label + "'");
  return *idx;
}

}  // namespace detail

/// Reads per-node values; nodes that are not listed default to 0 and are
/// reported on `warn` when it is non-null.
inline std::vector<double> read_node_values(const Graph& g, std::istream& in, const std::string& source,
                                            std::ostream* warn = nullptr) {
  std::vector<double> values(g.num_nodes(), 0.0);
  std::vector<char> seen(g.num_nodes(), 0);
  detail::for_each_record(in, [&](const std::vector<std::string>& f, std::size_t line_no) {
    const std::string at = detail::where(source, line_no);
    if (f.size() != 2) throw input_error(at + "expected '<label> <value>'");
    const node_t i = detail::lookup(g, f[0], at);
    if (seen[i]) throw input_error(at + "node '" + f[0] + "' listed twice");
    seen[i] = 1;
    values[i] = detail::parse_real(f[1], at);
  });
  std::size_t missing = 0;
  for (char s : seen) missing += s ? 0 : 1;
  if (missing > 0 && warn) {
    *warn << "warning: " << source << ": " << missing << " node(s) not listed, defaulting to 0\n";
  }
  return values;
}

inline std::vector<double> read_node_values_file(const Graph& g, const std::filesystem::path& path,
                                                 std::ostream* warn = nullptr) {
  auto in = detail::open_input(path, "state");
  return read_node_values(g, in, path.string(), warn);
}

/// Unlisted nodes are followers.
inline Partition read_partition(const Graph& g, std::istream& in, const std::string& source) {
  std::vector<int> role(g.num_nodes(), -1);  // 1 leader, 0 follower
  detail::for_each_record(in, [&](const std::vector<std::string>& f, std::size_t line_no) {
    const std::string at = detail::where(source, line_no);
    if (f.size() != 2 || (f[0] != "leader" && f[0] != "follower")) {
      throw input_error(at + "expected 'leader <label>' or 'follower <label>'");
    }
    const node_t i = detail::lookup(g, f[1], at);
    const int r = f[0] == "leader" ? 1 : 0;
    if (role[i] != -1 && role[i] != r) throw input_error(at + "node '" + f[1] + "' is both leader and follower");
    role[i] = r;
  });
  std::vector<node_t> leaders;
  for (node_t i = 0; i < g.num_nodes(); ++i) {
    if (role[i] == 1) leaders.push_back(i);
  }
  try {
    return Partition::from_leaders(g, NodeSet::of(std::move(leaders), g.num_nodes()));
  } catch (const input_error& e) {
    throw input_error(source + ": " + e.what());
  }
}

inline Partition read_partition_file(const Graph& g, const std::filesystem::path& path) {
  auto in = detail::open_input(path, "partition");
  return read_partition(g, in, path.string());
}

/// Leaders without a line get the zero rule.
inline LeaderControl read_controls(const Graph& g, const Partition& p, std::istream& in, const std::string& source) {
  LeaderControl control(p.leaders().size());
  std::vector<char> seen(p.leaders().size(), 0);
  detail::for_each_record(in, [&](const std::vector<std::string>& f, std::size_t line_no) {
    const std::string at = detail::where(source, line_no);
    if (f.size() != 3) throw input_error(at + "expected '<label> <gain> <offset>'");
    const node_t i = detail::lookup(g, f[0], at);
    const auto k = p.leader_maps().to_local[i];
    if (k == kOutside) throw input_error(at + "node '" + f[0] + "' is not a leader");
    if (seen[static_cast<std::size_t>(k)]) throw input_error(at + "leader '" + f[0] + "' listed twice");
    seen[static_cast<std::size_t>(k)] = 1;
    control.set(static_cast<std::size_t>(k), {detail::parse_real(f[1], at), detail::parse_real(f[2], at)});
  });
  return control;
}

inline LeaderControl read_controls_file(const Graph& g, const Partition& p, const std::filesystem::path& path) {
  auto in = detail::open_input(path, "controls");
  return read_controls(g, p, in, path.string());
}

}  // namespace hkcons
