#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "hkcons/error.hpp"
#include "hkcons/exact_oracle.hpp"
#include "hkcons/graph.hpp"
#include "hkcons/hkpr_mc.hpp"
#include "hkcons/rng.hpp"

namespace hkcons {

enum class Mode { exact, mc };

inline const char* to_string(Mode m) { return m == Mode::exact ? "exact" : "mc"; }

struct ConsensusResult {
  StateVector state;
  double chi_w = 0.0;
  double t = 0.0;
  double epsilon = 0.0;
  bool exact = true;
  std::size_t r_walks = 0;  // mc only
  std::size_t k_cap = 0;    // mc only
};

struct Disagreement {
  double euclidean = 0.0;
  double dnorm = 0.0;
};

struct TraceRow {
  double t = 0.0;
  Disagreement disagreement;
};

struct ConvergenceTrace {
  std::vector<TraceRow> rows;
  double lambda1_marker = 0.0;  // 1 / lambda1
};

/// chi_w(x) = sum d_i x_i / sum d_i.
inline double weighted_average(const Graph& g, std::span<const double> x) {
  if (x.size() != g.num_nodes()) throw input_error("state vector length does not match the graph");
  double acc = 0.0;
  for (node_t i = 0; i < g.num_nodes(); ++i) acc += g.degree(i) * x[i];
  return acc / static_cast<double>(g.volume());
}

/// Convergence time scale 1 / lambda1, the default diffusion time.
inline double default_time(const Graph& g) { return 1.0 / lambda1(g).lambda1; }

/// State x(t) = rho_{t,f} D^{-1} with f = x(0)^T D.
inline ConsensusResult consensus_state(const Graph& g, std::span<const double> x0, double t, double epsilon,
                                       std::uint64_t seed, Mode mode, const McOptions& opts = {}) {
  if (x0.size() != g.num_nodes()) throw input_error("state vector length does not match the graph");
  require_epsilon(epsilon);
  require_time(t);
  if (!g.connected()) throw precondition_error("graph is not connected");

  std::vector<double> f(g.num_nodes());
  for (node_t i = 0; i < g.num_nodes(); ++i) f[i] = x0[i] * g.degree(i);

  ConsensusResult res;
  res.chi_w = weighted_average(g, x0);
  res.t = t;
  res.epsilon = epsilon;
  res.exact = mode == Mode::exact;
  std::vector<double> rho;
  if (mode == Mode::exact) {
    rho = exact_hkpr(g, t, f).values;
  } else {
    HkprEstimate est = approx_hkpr(g, t, Preference(std::move(f)), epsilon, seed, opts);
    res.r_walks = est.r_walks;
    res.k_cap = est.k_cap;
    rho = std::move(est.values);
  }
  for (node_t i = 0; i < g.num_nodes(); ++i) rho[i] /= g.degree(i);
  res.state = {std::move(rho), t};
  return res;
}

/// Norms of delta = x - chi 1: plain Euclidean and D^{1/2}-weighted.
inline Disagreement disagreement(const Graph& g, std::span<const double> x, double chi) {
  if (x.size() != g.num_nodes()) throw input_error("state vector length does not match the graph");
  double e2 = 0.0, d2 = 0.0;
  for (node_t i = 0; i < g.num_nodes(); ++i) {
    const double delta = x[i] - chi;
    e2 += delta * delta;
    d2 += g.degree(i) * delta * delta;
  }
  return {std::sqrt(e2), std::sqrt(d2)};
}

/// Row i uses seed derive_seed(seed, i) in mc mode.
inline ConvergenceTrace convergence_trace(const Graph& g, std::span<const double> x0, std::span<const double> t_grid,
                                          double epsilon, std::uint64_t seed, Mode mode,
                                          const McOptions& opts = {}) {
  if (t_grid.empty()) throw input_error("time grid is empty");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    require_time(t_grid[i]);
    if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw input_error("time grid must be strictly increasing");
  }
  ConvergenceTrace trace;
  trace.lambda1_marker = default_time(g);
  const double chi = weighted_average(g, x0);
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const ConsensusResult res = consensus_state(g, x0, t_grid[i], epsilon, derive_seed(seed, i), mode, opts);
    trace.rows.push_back({t_grid[i], disagreement(g, res.state.values, chi)});
  }
  return trace;
}

inline std::vector<double> linear_grid(double lo, double hi, std::size_t count) {
  if (count == 0 || !(hi >= lo) || lo < 0.0) throw input_error("invalid linear time grid");
  if (count == 1) return {lo};
  if (hi == lo) throw input_error("time grid with several steps needs t-max > t-min");
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) grid[i] = lo + (hi - lo) * static_cast<double>(i) / (count - 1);
  grid.back() = hi;
  return grid;
}

inline std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (count == 0 || !(lo > 0.0) || !(hi >= lo)) throw input_error("log time grid needs 0 < t-min <= t-max");
  if (count == 1) return {lo};
  if (hi == lo) throw input_error("time grid with several steps needs t-max > t-min");
  std::vector<double> grid(count);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i) grid[i] = std::exp(a + (b - a) * static_cast<double>(i) / (count - 1));
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

}  // namespace hkcons
