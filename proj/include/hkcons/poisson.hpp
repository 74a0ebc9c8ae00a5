#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace hkcons {

/// Poisson(t) weights e^{-t} t^k / k! for k = 0..K, where K is the smallest
/// cutoff whose remaining tail mass is at most the requested tolerance.
struct PoissonTruncation {
  std::vector<double> pmf;
  double tail = 0.0;  // upper estimate of the mass beyond the cutoff

  std::size_t cutoff() const { return pmf.size() - 1; }
};

inline PoissonTruncation poisson_truncation(double t, double tail_tol) {
  PoissonTruncation out;
  if (t == 0.0) {
    out.pmf = {1.0};
    return out;
  }
  // Log-space recurrence so that large t does not underflow e^{-t}.
  const double log_t = std::log(t);
  double log_p = -t;
  double cdf = 0.0;
  for (std::size_t k = 0;; ++k) {
    if (k > 0) log_p += log_t - std::log(static_cast<double>(k));
    const double p = std::exp(log_p);
    out.pmf.push_back(p);
    cdf += p;
    double tail = std::max(0.0, 1.0 - cdf);
    const double kk = static_cast<double>(k);
    if (kk + 2.0 > t) {
      // Ratios p_{j+1}/p_j = t/(j+1) are at most t/(k+2) past the cutoff.
      const double next = p * t / (kk + 1.0);
      tail = std::min(tail, next / (1.0 - t / (kk + 2.0)));
    }
    if (tail <= tail_tol) {
      out.tail = tail;
      return out;
    }
  }
}

}  // namespace hkcons
