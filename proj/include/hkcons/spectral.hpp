#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "hkcons/rng.hpp"

namespace hkcons {

struct EigenEstimate {
  double eigenvalue = 0.0;
  std::vector<double> vector;
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline void remove_component(std::span<double> v, std::span<const double> unit) {
  if (unit.empty()) return;
  const double c = dot(v, unit);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * unit[i];
}

}  // namespace detail

/// Power iteration for the largest eigenvalue of a symmetric operator whose
/// spectrum lies in [0, 1]. `deflate`, if nonempty, is a unit eigenvector kept
/// out of the iterate. Stops once ||A v - mu v||_2 <= tol with mu the Rayleigh
/// quotient; on failure the last iterate is returned with converged = false.
template <class Operator>
EigenEstimate dominant_eigenpair(std::size_t dim, Operator&& apply, std::span<const double> deflate, double tol,
                                 std::size_t max_iter, std::uint64_t seed = 0x1234) {
  EigenEstimate est;
  std::vector<double> v(dim), w(dim);
  WalkStream rng(seed, 0);
  for (auto& x : v) x = rng.uniform() - 0.5;
  detail::remove_component(v, deflate);
  double norm = std::sqrt(detail::dot(v, v));
  for (auto& x : v) x /= norm;

  for (std::size_t it = 1; it <= max_iter; ++it) {
    apply(std::span<const double>(v), std::span<double>(w));
    detail::remove_component(w, deflate);
    const double mu = detail::dot(v, w);
    double res2 = 0.0;
    for (std::size_t i = 0; i < dim; ++i) res2 += (w[i] - mu * v[i]) * (w[i] - mu * v[i]);
    est.eigenvalue = mu;
    est.iterations = it;
    est.residual = std::sqrt(res2);
    if (est.residual <= tol) {
      est.converged = true;
      break;
    }
    norm = std::sqrt(detail::dot(w, w));
    for (std::size_t i = 0; i < dim; ++i) v[i] = w[i] / norm;
  }
  est.vector = std::move(v);
  return est;
}

}  // namespace hkcons
