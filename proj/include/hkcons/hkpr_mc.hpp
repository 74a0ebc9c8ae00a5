#pragma once

// Monte Carlo heat kernel pagerank: every walk starts at a node drawn in
// proportion to |f|, takes a Poisson(t) number of steps capped at K, and
// deposits sign(f_i) * ||f||_1 / r at its endpoint.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "hkcons/error.hpp"
#include "hkcons/graph.hpp"
#include "hkcons/poisson.hpp"
#include "hkcons/rng.hpp"

namespace hkcons {

/// Signed seed vector with a cached 1-norm and cumulative |f| table for sampling.
class Preference {
 public:
  Preference() = default;
  explicit Preference(std::vector<double> values) : values_(std::move(values)) {
    cumulative_.reserve(values_.size());
    double acc = 0.0;
    for (double v : values_) {
      if (!std::isfinite(v)) throw input_error("preference vector has a non-finite entry");
      acc += std::abs(v);
      cumulative_.push_back(acc);
    }
    one_norm_ = acc;
  }

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double one_norm() const { return one_norm_; }

  /// Index i with probability |f_i| / ||f||_1, for u uniform in [0, 1).
  std::size_t sample(double u) const {
    const double target = u * one_norm_;
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    auto idx = static_cast<std::size_t>(it - cumulative_.begin());
    // Guard against rounding landing past the end or on a zero entry.
    if (idx >= values_.size()) idx = values_.size() - 1;
    while (values_[idx] == 0.0 && idx > 0) --idx;
    return idx;
  }

 private:
  std::vector<double> values_;
  std::vector<double> cumulative_;
  double one_norm_ = 0.0;
};

struct WalkParams {
  std::size_t r = 1;  // number of walks
  std::size_t K = 0;  // step cap
};

/// r = ceil((16 / eps^3) ln max(n, 2)); K = smallest cap with Poisson(t) tail <= eps / 2.
inline WalkParams walk_params(std::size_t n_effective, double epsilon, double t) {
  require_epsilon(epsilon);
  require_time(t);
  if (n_effective == 0) throw input_error("walk_params needs at least one node");
  const double n = static_cast<double>(std::max<std::size_t>(n_effective, 2));
  WalkParams p;
  p.r = static_cast<std::size_t>(std::ceil(16.0 / (epsilon * epsilon * epsilon) * std::log(n)));
  p.K = poisson_truncation(t, epsilon / 2.0).cutoff();
  return p;
}

/// Inverse-cdf sampler for min(Poisson(t), K).
class WalkLengthSampler {
 public:
  WalkLengthSampler(double t, std::size_t K) {
    require_time(t);
    cdf_.reserve(K);
    double acc = 0.0;
    if (t == 0.0) {
      cdf_.assign(K, 1.0);
      return;
    }
    const double log_t = std::log(t);
    double log_p = -t;
    for (std::size_t k = 0; k < K; ++k) {
      if (k > 0) log_p += log_t - std::log(static_cast<double>(k));
      acc += std::exp(log_p);
      cdf_.push_back(acc);
    }
  }

  std::size_t cap() const { return cdf_.size(); }

  std::size_t sample(WalkStream& rng) const {
    const double u = rng.uniform();
    std::size_t k = 0;
    while (k < cdf_.size() && u >= cdf_[k]) ++k;
    return k;
  }

 private:
  std::vector<double> cdf_;  // P(k' <= k) for k < K
};

inline std::size_t sample_walk_length(double t, std::size_t K, WalkStream& rng) {
  return WalkLengthSampler(t, K).sample(rng);
}

/// k uniform-neighbor steps from `start`.
inline node_t random_walk(const Graph& g, node_t start, std::size_t k, WalkStream& rng) {
  node_t v = start;
  for (std::size_t step = 0; step < k; ++step) {
    const auto nbrs = g.neighbors(v);
    v = nbrs[rng.below(nbrs.size())];
  }
  return v;
}

struct McOptions {
  std::optional<std::size_t> walks;  // overrides r from walk_params
  unsigned workers = 1;
};

struct HkprEstimate {
  std::vector<double> values;
  double t = 0.0;
  double epsilon = 0.0;
  std::size_t r_walks = 0;
  std::size_t k_cap = 0;
  std::uint64_t seed = 0;
  std::uint64_t total_steps = 0;  // walk steps actually taken; at most r * K
};

/// A node subset with its index maps, built once and reused across restricted runs.
class FollowerView {
 public:
  FollowerView(const Graph& g, NodeSet followers)
      : graph_(&g), followers_(std::move(followers)), maps_(subset_index_maps(g, followers_)) {}

  const Graph& graph() const { return *graph_; }
  const NodeSet& followers() const { return followers_; }
  const IndexMaps& maps() const { return maps_; }
  std::size_t size() const { return followers_.size(); }

 private:
  const Graph* graph_;
  NodeSet followers_;
  IndexMaps maps_;
};

namespace detail {

// Outcome of one walk: +(local+1) or -(local+1) for a signed deposit, 0 if killed.
using WalkOutcome = std::int64_t;

struct WalkSetup {
  const Graph& graph;
  const IndexMaps* maps;  // null for full-graph walks
  const Preference& pref;
  WalkLengthSampler lengths;
  std::uint64_t seed;
};

inline std::uint64_t run_walks(const WalkSetup& setup, std::size_t begin, std::size_t end,
                               std::span<WalkOutcome> outcomes) {
  std::uint64_t steps = 0;
  for (std::size_t w = begin; w < end; ++w) {
    WalkStream rng(setup.seed, w);
    // Length first, so the step count of walk w does not depend on the graph.
    const std::size_t k = setup.lengths.sample(rng);
    const std::size_t start_local = setup.pref.sample(rng.uniform());
    const double sign = setup.pref.values()[start_local] < 0.0 ? -1.0 : 1.0;
    node_t v = setup.maps ? setup.maps->to_global[start_local] : static_cast<node_t>(start_local);
    bool alive = true;
    for (std::size_t step = 0; step < k; ++step) {
      const auto nbrs = setup.graph.neighbors(v);
      v = nbrs[rng.below(nbrs.size())];
      ++steps;
      if (setup.maps && setup.maps->to_local[v] == kOutside) {
        alive = false;
        break;
      }
    }
    if (!alive) {
      outcomes[w] = 0;
      continue;
    }
    const auto local = setup.maps ? setup.maps->to_local[v] : static_cast<std::int64_t>(v);
    outcomes[w] = sign > 0.0 ? local + 1 : -(local + 1);
  }
  return steps;
}

inline HkprEstimate estimate(const WalkSetup& setup, std::size_t dim, std::size_t r, double t, double epsilon,
                             const McOptions& opts) {
  HkprEstimate est;
  est.values.assign(dim, 0.0);
  est.t = t;
  est.epsilon = epsilon;
  est.r_walks = r;
  est.k_cap = setup.lengths.cap();
  est.seed = setup.seed;
  if (setup.pref.one_norm() == 0.0 || r == 0) {
    est.r_walks = 0;
    return est;
  }

  std::vector<WalkOutcome> outcomes(r);
  const unsigned workers = std::max(1u, std::min<unsigned>(opts.workers, static_cast<unsigned>(r)));
  if (workers == 1) {
    est.total_steps = run_walks(setup, 0, r, outcomes);
  } else {
    std::vector<std::uint64_t> steps(workers, 0);
    std::vector<std::thread> pool;
    const std::size_t chunk = (r + workers - 1) / workers;
    for (unsigned id = 0; id < workers; ++id) {
      const std::size_t b = std::min(r, id * chunk);
      const std::size_t e = std::min(r, b + chunk);
      pool.emplace_back([&, id, b, e] { steps[id] = run_walks(setup, b, e, outcomes); });
    }
    for (auto& th : pool) th.join();
    for (auto s : steps) est.total_steps += s;
  }

  // Integer tallies make the merge independent of evaluation order.
  std::vector<std::int64_t> tally(dim, 0);
  for (WalkOutcome o : outcomes) {
    if (o > 0) ++tally[static_cast<std::size_t>(o - 1)];
    else if (o < 0) --tally[static_cast<std::size_t>(-o - 1)];
  }
  const double norm = setup.pref.one_norm();
  const double rr = static_cast<double>(r);
  for (std::size_t i = 0; i < dim; ++i) {
    if (tally[i] != 0) est.values[i] = static_cast<double>(tally[i]) * norm / rr;
  }
  return est;
}

}  // namespace detail

/// Monte Carlo estimate of rho_{t,f} = f H_t over the whole graph.
inline HkprEstimate approx_hkpr(const Graph& g, double t, const Preference& f, double epsilon, std::uint64_t seed,
                                const McOptions& opts = {}) {
  if (f.size() != g.num_nodes()) throw input_error("preference vector length does not match the graph");
  if (!g.connected()) throw precondition_error("graph is not connected");
  const WalkParams p = walk_params(g.num_nodes(), epsilon, t);
  const detail::WalkSetup setup{g, nullptr, f, WalkLengthSampler(t, p.K), seed};
  return detail::estimate(setup, g.num_nodes(), opts.walks.value_or(p.r), t, epsilon, opts);
}

/// Dirichlet-restricted estimate of f (H_t)_S for a preference over the subset.
/// Walks use the full graph's transition kernel; a walk that leaves the subset
/// is absorbed and deposits nothing. Output is indexed by subset position.
inline HkprEstimate approx_hkpr_restricted(const FollowerView& view, double t, const Preference& f, double epsilon,
                                           std::uint64_t seed, const McOptions& opts = {}) {
  if (f.size() != view.size()) throw input_error("preference vector length does not match the follower set");
  if (!view.graph().connected()) throw precondition_error("graph is not connected");
  const WalkParams p = walk_params(view.size(), epsilon, t);
  const detail::WalkSetup setup{view.graph(), &view.maps(), f, WalkLengthSampler(t, p.K), seed};
  return detail::estimate(setup, view.size(), opts.walks.value_or(p.r), t, epsilon, opts);
}

inline HkprEstimate approx_hkpr_restricted(const Graph& g, const NodeSet& follower, double t, const Preference& f,
                                           double epsilon, std::uint64_t seed, const McOptions& opts = {}) {
  return approx_hkpr_restricted(FollowerView(g, follower), t, f, epsilon, seed, opts);
}

}  // namespace hkcons
