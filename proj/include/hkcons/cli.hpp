#pragma once

// Command-line front end: hkpr | consensus | sweep | leader-follow | lambda1.
// Exit codes: 0 success, 2 usage or input error, 3 mathematical precondition
// failure (disconnected graph or follower set, singular system).

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hkcons/consensus.hpp"
#include "hkcons/error.hpp"
#include "hkcons/exact_oracle.hpp"
#include "hkcons/graph.hpp"
#include "hkcons/hkpr_mc.hpp"
#include "hkcons/io.hpp"
#include "hkcons/leader_follow.hpp"

namespace hkcons::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitMath = 3;

struct RunConfig {
  std::string command;
  std::string graph_path;
  std::string state_path;
  std::string pref_path;
  std::string partition_path;
  std::string control_path;
  std::optional<double> t;
  std::optional<double> t_min;
  std::optional<double> t_max;
  std::size_t t_steps = 25;
  std::string t_scale = "log";
  double epsilon = 0.1;
  std::uint64_t seed = 0;
  std::string mode = "mc";
  std::string output_path;
  std::optional<std::size_t> walks;
  std::optional<std::size_t> inner_walks;
  unsigned workers = 1;
};

namespace detail {

inline Mode parse_mode(const std::string& m) {
  if (m == "exact") return Mode::exact;
  if (m == "mc") return Mode::mc;
  throw input_error("--mode must be 'exact' or 'mc', got '" + m + "'");
}

inline McOptions mc_options(const RunConfig& cfg) { return McOptions{cfg.walks, cfg.workers}; }

inline double resolve_time(const Graph& g, const RunConfig& cfg) {
  if (cfg.t) {
    require_time(*cfg.t);
    return *cfg.t;
  }
  return default_time(g);
}

inline void cmd_hkpr(const RunConfig& cfg, std::ostream& out) {
  const Graph g = load_edge_list_file(cfg.graph_path);
  const Mode mode = parse_mode(cfg.mode);
  require_epsilon(cfg.epsilon);
  auto f = read_node_values_file(g, cfg.pref_path);
  const double t = resolve_time(g, cfg);
  std::vector<double> values;
  if (mode == Mode::exact) {
    values = exact_hkpr(g, t, f).values;
    out << "# t=" << format_real(t) << ", eps=" << format_real(cfg.epsilon) << ", seed=" << cfg.seed
        << ", mode=exact\n";
  } else {
    if (!g.connected()) throw precondition_error("graph is not connected");
    HkprEstimate est = approx_hkpr(g, t, Preference(std::move(f)), cfg.epsilon, cfg.seed, mc_options(cfg));
    out << "# t=" << format_real(t) << ", eps=" << format_real(cfg.epsilon) << ", seed=" << cfg.seed
        << ", r=" << est.r_walks << ", K=" << est.k_cap << ", mode=mc\n";
    values = std::move(est.values);
  }
  out << "node,value\n";
  for (node_t i = 0; i < g.num_nodes(); ++i) out << g.label(i) << ',' << format_real(values[i]) << '\n';
}

inline void cmd_consensus(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Graph g = load_edge_list_file(cfg.graph_path);
  const Mode mode = parse_mode(cfg.mode);
  require_epsilon(cfg.epsilon);
  const auto x0 = read_node_values_file(g, cfg.state_path, &err);
  const double t = resolve_time(g, cfg);
  const ConsensusResult res = consensus_state(g, x0, t, cfg.epsilon, cfg.seed, mode, mc_options(cfg));
  out << "# t=" << format_real(t) << ", eps=" << format_real(cfg.epsilon) << ", seed=" << cfg.seed;
  if (mode == Mode::mc) out << ", r=" << res.r_walks << ", K=" << res.k_cap;
  out << ", mode=" << to_string(mode) << '\n';
  out << "node,x_t\n";
  for (node_t i = 0; i < g.num_nodes(); ++i) out << g.label(i) << ',' << format_real(res.state.values[i]) << '\n';
  out << "# chi_w=" << format_real(res.chi_w) << ", t=" << format_real(t) << ", mode=" << to_string(mode) << '\n';
}

inline void cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Graph g = load_edge_list_file(cfg.graph_path);
  const Mode mode = parse_mode(cfg.mode);
  require_epsilon(cfg.epsilon);
  const auto x0 = read_node_values_file(g, cfg.state_path, &err);
  const SpectralGap gap = lambda1(g);
  const double marker = 1.0 / gap.lambda1;
  std::vector<double> grid;
  if (cfg.t_scale == "log") {
    grid = log_grid(cfg.t_min.value_or(0.01 * marker), cfg.t_max.value_or(100.0 * marker), cfg.t_steps);
  } else if (cfg.t_scale == "linear") {
    grid = linear_grid(cfg.t_min.value_or(0.0), cfg.t_max.value_or(10.0 * marker), cfg.t_steps);
  } else {
    throw input_error("--t-scale must be 'log' or 'linear', got '" + cfg.t_scale + "'");
  }
  const ConvergenceTrace trace = convergence_trace(g, x0, grid, cfg.epsilon, cfg.seed, mode, mc_options(cfg));
  out << "# lambda1=" << format_real(gap.lambda1) << ", one_over_lambda1=" << format_real(marker)
      << ", eps=" << format_real(cfg.epsilon) << ", seed=" << cfg.seed << ", mode=" << to_string(mode) << '\n';
  out << "t,disagreement_euclidean,disagreement_dnorm\n";
  for (const TraceRow& row : trace.rows) {
    out << format_real(row.t) << ',' << format_real(row.disagreement.euclidean) << ','
        << format_real(row.disagreement.dnorm) << '\n';
  }
}

inline void cmd_leader_follow(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Graph g = load_edge_list_file(cfg.graph_path);
  const Mode mode = parse_mode(cfg.mode);
  require_epsilon(cfg.epsilon);
  const Partition p = read_partition_file(g, cfg.partition_path);
  const LeaderControl control =
      cfg.control_path.empty() ? LeaderControl(p.leaders().size()) : read_controls_file(g, p, cfg.control_path);
  const std::vector<double> x0 = cfg.state_path.empty() ? std::vector<double>(g.num_nodes(), 0.0)
                                                        : read_node_values_file(g, cfg.state_path, &err);
  const double t = cfg.t.value_or(0.0);
  const SolverOverrides overrides{cfg.walks, cfg.inner_walks, cfg.workers};
  const LfSolution sol = lf_consensus_state(g, p, x0, t, control, cfg.epsilon, cfg.seed, mode, overrides);
  if (sol.params) {
    out << "# T=" << format_real(sol.params->T) << ", N=" << sol.params->N << ", r=" << sol.params->r
        << ", lambda_min=" << format_real(sol.params->lambda_min) << ", eps=" << format_real(cfg.epsilon)
        << ", seed=" << cfg.seed << ", mode=mc\n";
  } else {
    out << "# mode=exact\n";
  }
  out << "follower,x_f\n";
  for (std::size_t a = 0; a < p.followers().size(); ++a) {
    out << g.label(p.followers()[a]) << ',' << format_real(sol.x.values[a]) << '\n';
  }
}

inline void cmd_lambda1(const RunConfig& cfg, std::ostream& out) {
  const Graph g = load_edge_list_file(cfg.graph_path);
  const SpectralGap gap = lambda1(g);
  out << "lambda1,residual,iterations\n";
  out << format_real(gap.lambda1) << ',' << format_real(gap.residual) << ',' << gap.iterations << '\n';
}

inline void dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.command == "hkpr") cmd_hkpr(cfg, out);
  else if (cfg.command == "consensus") cmd_consensus(cfg, out, err);
  else if (cfg.command == "sweep") cmd_sweep(cfg, out, err);
  else if (cfg.command == "leader-follow") cmd_leader_follow(cfg, out, err);
  else if (cfg.command == "lambda1") cmd_lambda1(cfg, out);
  else throw input_error("unknown command '" + cfg.command + "'");
}

}  // namespace detail

/// Runs one invocation. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heat kernel pagerank consensus solvers"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--graph", cfg.graph_path, "edge list file")->required();
    sub->add_option("--out", cfg.output_path, "output file (default stdout)");
  };
  auto add_solver = [&](CLI::App* sub) {
    sub->add_option("--eps", cfg.epsilon, "error parameter in (0,1)");
    sub->add_option("--seed", cfg.seed, "random seed");
    sub->add_option("--mode", cfg.mode, "exact or mc");
    sub->add_option("--walks", cfg.walks, "override the number of walks / quadrature samples");
    sub->add_option("--workers", cfg.workers, "worker threads for walk simulation");
  };

  auto* hkpr = app.add_subcommand("hkpr", "heat kernel pagerank of a preference vector");
  add_common(hkpr);
  add_solver(hkpr);
  hkpr->add_option("--pref", cfg.pref_path, "preference file '<label> <value>'")->required();
  hkpr->add_option("--t", cfg.t, "diffusion time (default 1/lambda1)");

  auto* consensus = app.add_subcommand("consensus", "weighted-average consensus state x(t)");
  add_common(consensus);
  add_solver(consensus);
  consensus->add_option("--state", cfg.state_path, "initial state file '<label> <value>'")->required();
  consensus->add_option("--t", cfg.t, "time (default 1/lambda1)");

  auto* sweep = app.add_subcommand("sweep", "disagreement over a grid of times");
  add_common(sweep);
  add_solver(sweep);
  sweep->add_option("--state", cfg.state_path, "initial state file")->required();
  sweep->add_option("--t-min", cfg.t_min, "first grid time");
  sweep->add_option("--t-max", cfg.t_max, "last grid time");
  sweep->add_option("--t-steps", cfg.t_steps, "number of grid points");
  sweep->add_option("--t-scale", cfg.t_scale, "log or linear");

  auto* lf = app.add_subcommand("leader-follow", "leader-following consensus for the followers");
  add_common(lf);
  add_solver(lf);
  lf->add_option("--partition", cfg.partition_path, "partition file")->required();
  lf->add_option("--controls", cfg.control_path, "leader control file '<label> <gain> <offset>'");
  lf->add_option("--state", cfg.state_path, "state file (default all zero)");
  lf->add_option("--t", cfg.t, "time tag of the state");
  lf->add_option("--inner-walks", cfg.inner_walks, "walks per quadrature sample");

  auto* l1 = app.add_subcommand("lambda1", "spectral gap of the normalized Laplacian");
  add_common(l1);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  cfg.command = app.get_subcommands().front()->get_name();

  try {
    std::ostringstream buffer;
    detail::dispatch(cfg, buffer, err);
    if (cfg.output_path.empty()) {
      out << buffer.str();
    } else {
      std::ofstream file(cfg.output_path, std::ios::binary);
      if (!file || !(file << buffer.str())) throw input_error("cannot write output file '" + cfg.output_path + "'");
    }
  } catch (const input_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const precondition_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitMath;
  }
  return kExitOk;
}

}  // namespace hkcons::cli
