#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hkcons/error.hpp"

namespace hkcons {

using node_t = std::uint32_t;

class Graph;
bool is_connected(const Graph& g);

/// Immutable undirected simple graph in compressed row form.
///
/// Indices are assigned by first appearance of a label. Every node has at
/// least one neighbor; rows are sorted strictly increasing.
class Graph {
 public:
  /// Builds from labels and an undirected edge list over indices into `labels`.
  /// Duplicate edges (in either orientation) are collapsed; self-loops and
  /// isolated nodes are rejected.
  static Graph from_edges(std::vector<std::string> labels,
                          std::vector<std::pair<node_t, node_t>> edges) {
    const std::size_t n = labels.size();
    if (n == 0 || edges.empty()) throw input_error("graph has no nodes or edges");
    std::vector<std::pair<node_t, node_t>> arcs;
    arcs.reserve(2 * edges.size());
    for (auto [u, v] : edges) {
      if (u >= n || v >= n) throw input_error("edge endpoint out of range");
      if (u == v) throw input_error("self-loop on node '" + labels[u] + "'");
      arcs.emplace_back(u, v);
      arcs.emplace_back(v, u);
    }
    std::sort(arcs.begin(), arcs.end());
    arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());

    Graph g;
    g.labels_ = std::move(labels);
    g.offsets_.assign(n + 1, 0);
    for (auto [u, v] : arcs) ++g.offsets_[u + 1];
    for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] += g.offsets_[i];
    g.targets_.reserve(arcs.size());
    for (auto [u, v] : arcs) g.targets_.push_back(v);
    g.degrees_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      g.degrees_[i] = static_cast<std::uint32_t>(g.offsets_[i + 1] - g.offsets_[i]);
      if (g.degrees_[i] == 0) throw input_error("isolated node '" + g.labels_[i] + "'");
    }
    g.index_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!g.index_.emplace(g.labels_[i], static_cast<node_t>(i)).second) {
        throw input_error("duplicate node label '" + g.labels_[i] + "'");
      }
    }
    g.connected_ = is_connected(g);
    return g;
  }

  std::size_t num_nodes() const { return degrees_.size(); }
  std::size_t num_edges() const { return targets_.size() / 2; }
  /// Sum of degrees, 2m.
  std::size_t volume() const { return targets_.size(); }

  std::span<const node_t> neighbors(node_t i) const {
    return {targets_.data() + offsets_[i], targets_.data() + offsets_[i + 1]};
  }
  std::uint32_t degree(node_t i) const { return degrees_[i]; }
  std::span<const std::uint32_t> degrees() const { return degrees_; }

  const std::string& label(node_t i) const { return labels_[i]; }
  std::span<const std::string> labels() const { return labels_; }
  std::optional<node_t> find(std::string_view label) const {
    auto it = index_.find(std::string(label));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Cached result of is_connected() taken at construction.
  bool connected() const { return connected_; }

  /// Structural identity: same labels in the same index order, same rows.
  bool operator==(const Graph& other) const {
    return labels_ == other.labels_ && offsets_ == other.offsets_ && targets_ == other.targets_;
  }

 private:
  Graph() = default;

  std::vector<std::string> labels_;
  std::vector<std::size_t> offsets_;
  std::vector<node_t> targets_;
  std::vector<std::uint32_t> degrees_;
  std::unordered_map<std::string, node_t> index_;
  bool connected_ = false;
};

/// Parses "u v" lines. '#' lines and blank lines are skipped.
inline Graph load_edge_list(std::istream& in) {
  std::vector<std::string> labels;
  std::unordered_map<std::string, node_t> index;
  std::vector<std::pair<node_t, node_t>> edges;
  auto intern = [&](const std::string& label) {
    auto [it, inserted] = index.emplace(label, static_cast<node_t>(labels.size()));
    if (inserted) labels.push_back(label);
    return it->second;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::string u, v, extra;
    if (!(fields >> u)) continue;
    if (u.front() == '#') continue;
    if (!(fields >> v) || (fields >> extra)) {
      throw input_error("line " + std::to_string(line_no) + ": expected two node labels");
    }
    if (u == v) throw input_error("line " + std::to_string(line_no) + ": self-loop on '" + u + "'");
    const node_t a = intern(u);
    const node_t b = intern(v);
    edges.emplace_back(a, b);
  }
  if (edges.empty()) throw input_error("edge list contains no edges");
  return Graph::from_edges(std::move(labels), std::move(edges));
}

inline Graph load_edge_list_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open graph file '" + path.string() + "'");
  try {
    return load_edge_list(in);
  } catch (const input_error& e) {
    throw input_error(path.string() + ": " + e.what());
  }
}

/// Canonical form: one "min max" line per edge, sorted by index pair.
inline void write_edge_list(const Graph& g, std::ostream& out) {
  for (node_t i = 0; i < g.num_nodes(); ++i) {
    for (node_t j : g.neighbors(i)) {
      if (i < j) out << g.label(i) << ' ' << g.label(j) << '\n';
    }
  }
}

inline bool is_connected(const Graph& g) {
  const std::size_t n = g.num_nodes();
  if (n == 0) return false;
  std::vector<char> seen(n, 0);
  std::vector<node_t> queue{0};
  seen[0] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    for (node_t j : g.neighbors(queue[head])) {
      if (!seen[j]) {
        seen[j] = 1;
        queue.push_back(j);
      }
    }
  }
  return queue.size() == n;
}

/// Sorted, duplicate-free set of node indices.
class NodeSet {
 public:
  NodeSet() = default;

  /// Sorts and validates; throws on out-of-range or repeated indices.
  static NodeSet of(std::vector<node_t> nodes, std::size_t n) {
    std::sort(nodes.begin(), nodes.end());
    if (std::adjacent_find(nodes.begin(), nodes.end()) != nodes.end()) {
      throw input_error("node set contains a repeated node");
    }
    if (!nodes.empty() && nodes.back() >= n) throw input_error("node index out of range");
    NodeSet s;
    s.nodes_ = std::move(nodes);
    return s;
  }

  std::span<const node_t> nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  node_t operator[](std::size_t i) const { return nodes_[i]; }
  bool contains(node_t v) const { return std::binary_search(nodes_.begin(), nodes_.end(), v); }

  NodeSet complement(std::size_t n) const {
    NodeSet out;
    out.nodes_.reserve(n - nodes_.size());
    std::size_t k = 0;
    for (node_t v = 0; v < n; ++v) {
      if (k < nodes_.size() && nodes_[k] == v) {
        ++k;
      } else {
        out.nodes_.push_back(v);
      }
    }
    return out;
  }

  bool operator==(const NodeSet&) const = default;

 private:
  std::vector<node_t> nodes_;
};

inline constexpr std::int64_t kOutside = -1;

/// Bijection between a node subset and [0, s).
struct IndexMaps {
  std::vector<std::int64_t> to_local;  // length n, kOutside for nodes not in the subset
  std::vector<node_t> to_global;       // length s
};

/// Index maps for any nonempty subset, including V itself.
inline IndexMaps subset_index_maps(const Graph& g, const NodeSet& subset) {
  if (subset.empty()) throw input_error("node subset is empty");
  if (subset.nodes().back() >= g.num_nodes()) throw input_error("node index out of range");
  IndexMaps maps;
  maps.to_local.assign(g.num_nodes(), kOutside);
  maps.to_global.assign(subset.nodes().begin(), subset.nodes().end());
  for (std::size_t k = 0; k < subset.size(); ++k) maps.to_local[subset[k]] = static_cast<std::int64_t>(k);
  return maps;
}

/// Index maps for a follower set, which must be a proper nonempty subset.
inline IndexMaps induced_index_maps(const Graph& g, const NodeSet& follower) {
  if (follower.empty()) throw input_error("follower set is empty");
  if (follower.size() >= g.num_nodes()) throw input_error("follower set must be a proper subset of the nodes");
  return subset_index_maps(g, follower);
}

/// Connected components of the subgraph induced by `subset`, as global index lists.
inline std::vector<std::vector<node_t>> induced_components(const Graph& g, const NodeSet& subset) {
  std::vector<char> inside(g.num_nodes(), 0);
  for (node_t v : subset.nodes()) inside[v] = 1;
  std::vector<char> seen(g.num_nodes(), 0);
  std::vector<std::vector<node_t>> components;
  for (node_t root : subset.nodes()) {
    if (seen[root]) continue;
    std::vector<node_t> comp{root};
    seen[root] = 1;
    for (std::size_t head = 0; head < comp.size(); ++head) {
      for (node_t j : g.neighbors(comp[head])) {
        if (inside[j] && !seen[j]) {
          seen[j] = 1;
          comp.push_back(j);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    components.push_back(std::move(comp));
  }
  return components;
}

/// y = P x with P = D^-1 A (neighbor average).
inline void apply_transition(const Graph& g, std::span<const double> x, std::span<double> y) {
  for (node_t i = 0; i < g.num_nodes(); ++i) {
    double acc = 0.0;
    for (node_t j : g.neighbors(i)) acc += x[j];
    y[i] = acc / g.degree(i);
  }
}

/// y = f P as a row-vector product: y_j = sum over neighbors i of f_i / d_i.
inline void apply_transition_left(const Graph& g, std::span<const double> f, std::span<double> y) {
  for (node_t j = 0; j < g.num_nodes(); ++j) {
    double acc = 0.0;
    for (node_t i : g.neighbors(j)) acc += f[i] / g.degree(i);
    y[j] = acc;
  }
}

}  // namespace hkcons
