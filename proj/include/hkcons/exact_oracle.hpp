#pragma once

// Dense, deterministic reference computations. These are the ground truth the
// Monte Carlo estimators are validated against and are meant for desk-scale
// graphs only (see max_dense_nodes()).

#include <cmath>
#include <cstdlib>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hkcons/error.hpp"
#include "hkcons/graph.hpp"
#include "hkcons/laplacian.hpp"
#include "hkcons/poisson.hpp"
#include "hkcons/spectral.hpp"

namespace hkcons {

inline constexpr double kDefaultSeriesTol = 1e-12;

struct StateVector {
  std::vector<double> values;
  double t = 0.0;
};

struct SpectralGap {
  double lambda1 = 0.0;
  std::size_t iterations = 0;
  double residual = 0.0;
};

/// Power iteration ran out of iterations; carries the best estimate reached.
class convergence_error : public precondition_error {
 public:
  convergence_error(const std::string& what, SpectralGap best) : precondition_error(what), best_(best) {}
  const SpectralGap& best() const { return best_; }

 private:
  SpectralGap best_;
};

/// Size guard for the reference routines; 4096 unless HKPR_MAX_DENSE_N is set.
inline std::size_t max_dense_nodes() {
  if (const char* env = std::getenv("HKPR_MAX_DENSE_N")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return 4096;
}

namespace detail {

inline void require_dense_size(std::size_t n) {
  if (n > max_dense_nodes()) {
    throw input_error("exact oracle refuses " + std::to_string(n) + " nodes (limit " +
                      std::to_string(max_dense_nodes()) + ", override with HKPR_MAX_DENSE_N)");
  }
}

inline void require_length(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw input_error(std::string(what) + " has length " + std::to_string(got) + ", expected " +
                      std::to_string(want));
  }
}

template <class Step>
std::vector<double> poisson_series(double t, double tol, std::span<const double> seed, Step&& step) {
  require_time(t);
  if (!(tol > 0.0)) throw input_error("series tolerance must be positive");
  const PoissonTruncation weights = poisson_truncation(t, tol);
  std::vector<double> term(seed.begin(), seed.end());
  std::vector<double> next(term.size());
  std::vector<double> out(term.size());
  for (std::size_t i = 0; i < term.size(); ++i) out[i] = weights.pmf[0] * term[i];
  for (std::size_t k = 1; k < weights.pmf.size(); ++k) {
    step(std::span<const double>(term), std::span<double>(next));
    std::swap(term, next);
    for (std::size_t i = 0; i < term.size(); ++i) out[i] += weights.pmf[k] * term[i];
  }
  return out;
}

}  // namespace detail

/// x(t) = H_t x = sum_k e^{-t} t^k/k! P^k x, truncated once the Poisson tail drops below tol.
inline StateVector heat_kernel_apply(const Graph& g, double t, std::span<const double> x,
                                     double tol = kDefaultSeriesTol) {
  detail::require_dense_size(g.num_nodes());
  detail::require_length(x.size(), g.num_nodes(), "state vector");
  auto values = detail::poisson_series(t, tol, x, [&](std::span<const double> in, std::span<double> out) {
    apply_transition(g, in, out);
  });
  return {std::move(values), t};
}

/// rho_{t,f} = f H_t as a row vector.
inline StateVector exact_hkpr(const Graph& g, double t, std::span<const double> f, double tol = kDefaultSeriesTol) {
  detail::require_dense_size(g.num_nodes());
  detail::require_length(f.size(), g.num_nodes(), "preference vector");
  auto values = detail::poisson_series(t, tol, f, [&](std::span<const double> in, std::span<double> out) {
    apply_transition_left(g, in, out);
  });
  return {std::move(values), t};
}

/// Solves L_f x = b, where L_f is the normalized Laplacian restricted to the
/// follower rows and columns, by partial-pivot elimination plus one round of
/// iterative refinement.
inline StateVector restricted_laplacian_solve_dense(const Graph& g, const NodeSet& follower,
                                                    std::span<const double> b) {
  const IndexMaps maps = subset_index_maps(g, follower);
  const std::size_t s = maps.to_global.size();
  detail::require_dense_size(s);
  detail::require_length(b.size(), s, "right-hand side");
  const DenseMatrix lf = restricted_laplacian_dense(g, maps);

  // LU factors in place, with row permutation.
  DenseMatrix lu = lf;
  std::vector<std::size_t> perm(s);
  for (std::size_t i = 0; i < s; ++i) perm[i] = i;
  for (std::size_t col = 0; col < s; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < s; ++r) {
      if (std::abs(lu(r, col)) > std::abs(lu(pivot, col))) pivot = r;
    }
    if (std::abs(lu(pivot, col)) < 1e-13) {
      throw precondition_error("restricted Laplacian is singular; every follower component needs a leader neighbor");
    }
    if (pivot != col) {
      for (std::size_t c = 0; c < s; ++c) std::swap(lu(col, c), lu(pivot, c));
      std::swap(perm[col], perm[pivot]);
    }
    for (std::size_t r = col + 1; r < s; ++r) {
      const double factor = lu(r, col) / lu(col, col);
      lu(r, col) = factor;
      for (std::size_t c = col + 1; c < s; ++c) lu(r, c) -= factor * lu(col, c);
    }
  }
  auto lu_solve = [&](std::span<const double> rhs) {
    std::vector<double> y(s);
    for (std::size_t i = 0; i < s; ++i) {
      double acc = rhs[perm[i]];
      for (std::size_t c = 0; c < i; ++c) acc -= lu(i, c) * y[c];
      y[i] = acc;
    }
    for (std::size_t i = s; i-- > 0;) {
      double acc = y[i];
      for (std::size_t c = i + 1; c < s; ++c) acc -= lu(i, c) * y[c];
      y[i] = acc / lu(i, i);
    }
    return y;
  };

  std::vector<double> x = lu_solve(b);
  std::vector<double> residual(s);
  for (std::size_t i = 0; i < s; ++i) {
    double acc = b[i];
    for (std::size_t c = 0; c < s; ++c) acc -= lf(i, c) * x[c];
    residual[i] = acc;
  }
  const std::vector<double> correction = lu_solve(residual);
  for (std::size_t i = 0; i < s; ++i) x[i] += correction[i];
  return {std::move(x), 0.0};
}

/// Smallest nonzero eigenvalue of the normalized Laplacian.
///
/// Power iteration on M = I - L/2, whose spectrum 1 - lambda/2 lies in [0, 1],
/// with the null vector D^{1/2} 1 projected out each step; lambda1 = 2(1 - mu).
inline SpectralGap lambda1(const Graph& g, double tol = 1e-10, std::size_t max_iter = 1'000'000) {
  detail::require_dense_size(g.num_nodes());
  if (!g.connected()) throw precondition_error("graph is not connected");
  const std::size_t n = g.num_nodes();
  std::vector<double> phi0(n);
  const double vol = static_cast<double>(g.volume());
  for (node_t i = 0; i < n; ++i) phi0[i] = std::sqrt(g.degree(i) / vol);

  std::vector<double> lx(n);
  auto apply_m = [&](std::span<const double> in, std::span<double> out) {
    apply_normalized_laplacian(g, in, lx);
    for (std::size_t i = 0; i < n; ++i) out[i] = in[i] - 0.5 * lx[i];
  };
  const EigenEstimate est = dominant_eigenpair(n, apply_m, phi0, tol, max_iter);
  const SpectralGap gap{2.0 * (1.0 - est.eigenvalue), est.iterations, est.residual};
  if (!est.converged) {
    throw convergence_error("lambda1 power iteration did not converge after " + std::to_string(max_iter) +
                                " iterations (residual " + std::to_string(est.residual) + ")",
                            gap);
  }
  return gap;
}

}  // namespace hkcons
