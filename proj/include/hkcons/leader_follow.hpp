#pragma once

// Leader-following consensus. Followers run the normalized protocol
//   u_i = (1/d_i) sum_{j in N_i} (sqrt(d_i/d_j) x_j - x_i),
// leaders apply their own affine rule, and the follower state solves
//   L_f x^f = b,  b = -(u^f + L_fl u^l).
// The Monte Carlo solver evaluates L_f^{-1} b = int_0^inf exp(-t L_f) b dt by
// uniform-time quadrature over [0, T] with Dirichlet-restricted hkpr samples.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hkcons/consensus.hpp"
#include "hkcons/error.hpp"
#include "hkcons/exact_oracle.hpp"
#include "hkcons/graph.hpp"
#include "hkcons/hkpr_mc.hpp"
#include "hkcons/laplacian.hpp"
#include "hkcons/spectral.hpp"

namespace hkcons {

/// Follower subgraph is disconnected; components() lists the pieces by label.
class disconnected_followers : public precondition_error {
 public:
  disconnected_followers(const std::string& what, std::vector<std::vector<std::string>> components)
      : precondition_error(what), components_(std::move(components)) {}
  const std::vector<std::vector<std::string>>& components() const { return components_; }

 private:
  std::vector<std::vector<std::string>> components_;
};

class Partition {
 public:
  /// Followers are the complement of `leaders`; both sides must be nonempty.
  static Partition from_leaders(const Graph& g, NodeSet leaders) {
    if (leaders.empty()) throw input_error("partition has no leaders");
    if (leaders.size() >= g.num_nodes()) throw input_error("partition has no followers");
    Partition p;
    p.followers_ = leaders.complement(g.num_nodes());
    p.leaders_ = std::move(leaders);
    p.follower_maps_ = induced_index_maps(g, p.followers_);
    p.leader_maps_ = subset_index_maps(g, p.leaders_);
    return p;
  }

  const NodeSet& leaders() const { return leaders_; }
  const NodeSet& followers() const { return followers_; }
  const IndexMaps& follower_maps() const { return follower_maps_; }
  const IndexMaps& leader_maps() const { return leader_maps_; }

 private:
  Partition() = default;

  NodeSet leaders_;
  NodeSet followers_;
  IndexMaps follower_maps_;
  IndexMaps leader_maps_;
};

struct AffineControl {
  double gain = 0.0;
  double offset = 0.0;
};

/// Per-leader rule u_i = gain_i * x_i + offset_i, indexed by leader position.
class LeaderControl {
 public:
  explicit LeaderControl(std::size_t leader_count) : rules_(leader_count) {}
  explicit LeaderControl(std::vector<AffineControl> rules) : rules_(std::move(rules)) {}

  void set(std::size_t leader_pos, AffineControl rule) { rules_.at(leader_pos) = rule; }
  std::span<const AffineControl> rules() const { return rules_; }

  std::vector<double> evaluate(const Partition& p, std::span<const double> x) const {
    if (rules_.size() != p.leaders().size()) throw input_error("leader control count does not match the partition");
    if (x.size() != p.follower_maps().to_local.size()) throw input_error("state vector length does not match the graph");
    std::vector<double> u(rules_.size());
    for (std::size_t k = 0; k < rules_.size(); ++k) u[k] = rules_[k].gain * x[p.leaders()[k]] + rules_[k].offset;
    return u;
  }

 private:
  std::vector<AffineControl> rules_;
};

struct SolverParams {
  double T = 0.0;           // integration horizon
  std::size_t N = 1;        // time grid size, ceil(T / eps)
  std::size_t r = 1;        // quadrature samples
  std::size_t inner_walks = 1;
  double lambda_min = 0.0;  // smallest eigenvalue of L_f
};

struct SolverOverrides {
  std::optional<std::size_t> samples;
  std::optional<std::size_t> inner_walks;
  unsigned workers = 1;
};

struct LfSolution {
  StateVector x;  // indexed by follower position
  std::optional<SolverParams> params;
  std::uint64_t total_steps = 0;
};

inline void check_follower_connectivity(const Graph& g, const Partition& p) {
  const auto comps = induced_components(g, p.followers());
  if (comps.size() <= 1) return;
  std::vector<std::vector<std::string>> labelled;
  std::string msg = "follower subgraph is disconnected:";
  for (const auto& comp : comps) {
    std::vector<std::string> names;
    msg += " {";
    for (std::size_t k = 0; k < comp.size(); ++k) {
      names.push_back(g.label(comp[k]));
      msg += (k ? "," : "") + g.label(comp[k]);
    }
    msg += "}";
    labelled.push_back(std::move(names));
  }
  throw disconnected_followers(msg, std::move(labelled));
}

/// u^f over followers for the full state x.
inline std::vector<double> follower_protocol(const Graph& g, const Partition& p, std::span<const double> x) {
  if (x.size() != g.num_nodes()) throw input_error("state vector length does not match the graph");
  std::vector<double> u(p.followers().size());
  for (std::size_t a = 0; a < u.size(); ++a) {
    const node_t i = p.followers()[a];
    const double di = g.degree(i);
    double acc = 0.0;
    for (node_t j : g.neighbors(i)) acc += std::sqrt(di / g.degree(j)) * x[j] - x[i];
    u[a] = acc / di;
  }
  return u;
}

/// b = -(u^f + L_fl u^l) with (L_fl)_{ij} = -1/sqrt(d_i d_j) on follower-leader edges.
inline std::vector<double> assemble_b(const Graph& g, const Partition& p, std::span<const double> u_f,
                                      std::span<const double> u_l) {
  if (u_f.size() != p.followers().size() || u_l.size() != p.leaders().size()) {
    throw input_error("control vector lengths do not match the partition");
  }
  std::vector<double> b(u_f.size());
  for (std::size_t a = 0; a < b.size(); ++a) {
    const node_t i = p.followers()[a];
    double lfl_ul = 0.0;
    for (node_t j : g.neighbors(i)) {
      const auto k = p.leader_maps().to_local[j];
      if (k != kOutside) {
        lfl_ul -= u_l[static_cast<std::size_t>(k)] / std::sqrt(static_cast<double>(g.degree(i)) * g.degree(j));
      }
    }
    b[a] = -(u_f[a] + lfl_ul);
  }
  return b;
}

inline std::vector<double> build_b(const Graph& g, const Partition& p, std::span<const double> x,
                                   std::span<const double> u_l) {
  return assemble_b(g, p, follower_protocol(g, p, x), u_l);
}

/// Smallest eigenvalue of L_f by power iteration on I - L_f/2 (L_f is positive definite).
inline double restricted_lambda_min(const Graph& g, const Partition& p) {
  const IndexMaps& maps = p.follower_maps();
  const std::size_t s = maps.to_global.size();
  std::vector<double> lx(s);
  auto apply_m = [&](std::span<const double> in, std::span<double> out) {
    apply_restricted_laplacian(g, maps, in, lx);
    for (std::size_t i = 0; i < s; ++i) out[i] = in[i] - 0.5 * lx[i];
  };
  const EigenEstimate est = dominant_eigenpair(s, apply_m, {}, 1e-10, 2'000'000);
  if (!est.converged) {
    throw precondition_error("power iteration for the restricted Laplacian did not converge (residual " +
                             std::to_string(est.residual) + ")");
  }
  return 2.0 * (1.0 - est.eigenvalue);
}

/// T = ln(s/eps) / lambda_min, N = ceil(T/eps), r = ceil((16/eps^3) ln max(s, 2)).
inline SolverParams solver_params(const Graph& g, const Partition& p, double epsilon,
                                  const SolverOverrides& overrides = {}) {
  require_epsilon(epsilon);
  const std::size_t s = p.followers().size();
  SolverParams sp;
  sp.lambda_min = restricted_lambda_min(g, p);
  sp.T = std::log(static_cast<double>(s) / epsilon) / sp.lambda_min;
  sp.N = static_cast<std::size_t>(std::ceil(sp.T / epsilon));
  sp.r = overrides.samples.value_or(walk_params(s, epsilon, 0.0).r);
  sp.inner_walks = overrides.inner_walks.value_or(1);
  if (sp.r == 0 || sp.inner_walks == 0) throw input_error("sample counts must be positive");
  return sp;
}

/// Solves L_f x^f = b. Exact mode uses the dense oracle; mc mode averages
/// T * (restricted hkpr of b~ = D_f^{1/2} b at t_j = jT/N) over r uniform draws
/// of j and post-scales by D_f^{-1/2}.
inline LfSolution lf_solve(const Graph& g, const Partition& p, std::span<const double> b, double epsilon,
                           std::uint64_t seed, Mode mode, const SolverOverrides& overrides = {}) {
  require_epsilon(epsilon);
  if (b.size() != p.followers().size()) throw input_error("right-hand side length does not match the followers");
  if (!g.connected()) throw precondition_error("graph is not connected");
  check_follower_connectivity(g, p);

  LfSolution sol;
  if (mode == Mode::exact) {
    sol.x = restricted_laplacian_solve_dense(g, p.followers(), b);
    return sol;
  }

  const std::size_t s = p.followers().size();
  const SolverParams sp = solver_params(g, p, epsilon, overrides);
  sol.params = sp;
  std::vector<double> seed_values(s);
  for (std::size_t a = 0; a < s; ++a) seed_values[a] = std::sqrt(static_cast<double>(g.degree(p.followers()[a]))) * b[a];
  const Preference seed_pref(std::move(seed_values));
  std::vector<double> sum(s, 0.0);
  if (seed_pref.one_norm() > 0.0) {
    const FollowerView view(g, p.followers());
    const McOptions inner{sp.inner_walks, overrides.workers};
    for (std::size_t i = 0; i < sp.r; ++i) {
      WalkStream time_rng(seed, i);
      const std::size_t j = 1 + time_rng.below(sp.N);
      const double t_j = sp.T * static_cast<double>(j) / static_cast<double>(sp.N);
      const HkprEstimate v = approx_hkpr_restricted(view, t_j, seed_pref, epsilon, derive_seed(seed, i), inner);
      sol.total_steps += v.total_steps;
      for (std::size_t a = 0; a < s; ++a) sum[a] += v.values[a];
    }
  }
  const double scale = sp.T / static_cast<double>(sp.r);
  for (std::size_t a = 0; a < s; ++a) {
    sum[a] *= scale / std::sqrt(static_cast<double>(g.degree(p.followers()[a])));
  }
  sol.x = {std::move(sum), 0.0};
  return sol;
}

/// Follower states consistent with the instantaneous controls at state x0.
inline LfSolution lf_consensus_state(const Graph& g, const Partition& p, std::span<const double> x0, double t,
                                     const LeaderControl& control, double epsilon, std::uint64_t seed, Mode mode,
                                     const SolverOverrides& overrides = {}) {
  require_time(t);
  const std::vector<double> u_l = control.evaluate(p, x0);
  const std::vector<double> b = build_b(g, p, x0, u_l);
  LfSolution sol = lf_solve(g, p, b, epsilon, seed, mode, overrides);
  sol.x.t = t;
  return sol;
}

}  // namespace hkcons
