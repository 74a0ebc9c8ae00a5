#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "hkcons/exact_oracle.hpp"
#include "hkcons/hkpr_mc.hpp"
#include "support/oracles.hpp"

using namespace hkcons;
using namespace hkcons::testing;

namespace {

// Poisson(t) tail beyond K by direct factorial evaluation.
double poisson_tail_direct(double t, std::size_t K) {
  double cdf = 0.0, fact = 1.0;
  for (std::size_t k = 0; k <= K; ++k) {
    if (k > 0) fact *= static_cast<double>(k);
    cdf += std::exp(-t) * std::pow(t, static_cast<double>(k)) / fact;
  }
  return 1.0 - cdf;
}

std::size_t smallest_cap_direct(double t, double eps) {
  std::size_t K = 0;
  while (poisson_tail_direct(t, K) > eps / 2.0) ++K;
  return K;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

// Exact expectation of the restricted estimator with walk lengths min(Poisson(t), K):
// sum_k w_k f P_S^k with the clamped weights, by dense matrix powers.
std::vector<double> clamped_restricted_expectation(const Graph& g, const std::vector<node_t>& subset,
                                                   const std::vector<double>& f, double t, std::size_t K) {
  const std::size_t s = subset.size();
  std::vector<std::vector<double>> p(s, std::vector<double>(s, 0.0));
  for (std::size_t a = 0; a < s; ++a) {
    for (std::size_t b = 0; b < s; ++b) {
      const auto nb = g.neighbors(subset[a]);
      if (std::binary_search(nb.begin(), nb.end(), subset[b])) p[a][b] = 1.0 / g.degree(subset[a]);
    }
  }
  std::vector<double> row = f, out(s, 0.0);
  double fact = 1.0, used = 0.0;
  for (std::size_t k = 0; k <= K; ++k) {
    if (k > 0) fact *= static_cast<double>(k);
    const double w = k < K ? std::exp(-t) * std::pow(t, static_cast<double>(k)) / fact : 1.0 - used;
    used += w;
    for (std::size_t j = 0; j < s; ++j) out[j] += w * row[j];
    std::vector<double> next(s, 0.0);
    for (std::size_t a = 0; a < s; ++a)
      for (std::size_t b = 0; b < s; ++b) next[b] += row[a] * p[a][b];
    row = next;
  }
  return out;
}

}  // namespace

TEST(WalkParams, FormulaExamples) {
  WalkParams p = walk_params(2, 0.5, 0.0);
  EXPECT_EQ(p.r, 89u);
  EXPECT_EQ(p.K, 0u);
  p = walk_params(1, 0.9, 1.0);
  EXPECT_EQ(p.r, 16u);
  EXPECT_EQ(p.K, 1u);
  EXPECT_EQ(walk_params(10, 0.5, 1.0).K, 2u);
}

TEST(WalkParams, CapMatchesDirectPoissonTail) {
  for (double eps : {0.05, 0.1, 0.3, 0.5, 0.9}) {
    for (double t : {0.0, 0.2, 1.0, 3.3, 10.0, 25.0}) {
      const WalkParams p = walk_params(100, eps, t);
      EXPECT_EQ(p.K, smallest_cap_direct(t, eps)) << "t=" << t << " eps=" << eps;
      EXPECT_GE(static_cast<double>(p.K), t - 1.0);
      EXPECT_EQ(p.r, static_cast<std::size_t>(std::ceil(16.0 / (eps * eps * eps) * std::log(100.0))));
    }
  }
}

TEST(WalkParams, RejectsBadEpsilon) {
  EXPECT_THROW(walk_params(10, 0.0, 1.0), input_error);
  EXPECT_THROW(walk_params(10, 1.0, 1.0), input_error);
  EXPECT_THROW(walk_params(10, 0.5, -1.0), input_error);
}

TEST(SampleWalkLength, ZeroTimeAndZeroCap) {
  WalkStream rng(1, 2);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(sample_walk_length(0.0, 10, rng), 0u);
    EXPECT_EQ(sample_walk_length(3.0, 0, rng), 0u);
  }
}

TEST(SampleWalkLength, PoissonFrequencies) {
  WalkLengthSampler sampler(1.0, 40);
  std::vector<int> hist(41, 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    WalkStream rng(42, static_cast<std::uint64_t>(i));
    ++hist[sampler.sample(rng)];
  }
  EXPECT_NEAR(hist[0] / static_cast<double>(draws), std::exp(-1.0), 0.01);
  EXPECT_NEAR(hist[1] / static_cast<double>(draws), std::exp(-1.0), 0.01);
  EXPECT_NEAR(hist[2] / static_cast<double>(draws), std::exp(-1.0) / 2, 0.01);
}

TEST(SampleWalkLength, ClampsAtCap) {
  WalkLengthSampler sampler(50.0, 3);
  WalkStream rng(3, 3);
  for (int i = 0; i < 200; ++i) EXPECT_EQ(sampler.sample(rng), 3u);
}

TEST(RandomWalk, TwoNodePath) {
  const Graph g = graph_from_text("0 1");
  WalkStream rng(0, 0);
  EXPECT_EQ(random_walk(g, 0, 1, rng), 1u);
  EXPECT_EQ(random_walk(g, 0, 2, rng), 0u);
  const Graph h = random_connected_graph(10, 5, 1);
  EXPECT_EQ(random_walk(h, 7, 0, rng), 7u);
}

TEST(ApproxHkpr, TimeZeroReturnsPreference) {
  const Graph g = random_connected_graph(12, 6, 3);
  std::vector<double> f(12, 0.0);
  f[4] = 1.0;
  const HkprEstimate est = approx_hkpr(g, 0.0, Preference(f), 0.3, 5);
  EXPECT_EQ(est.k_cap, 0u);
  EXPECT_EQ(est.total_steps, 0u);
  EXPECT_EQ(est.values, f);

  std::vector<double> spread{0.5, 0.0, 0.25, 0.25, 0, 0, 0, 0, 0, 0, 0, 0};
  const HkprEstimate est2 = approx_hkpr(g, 0.0, Preference(spread), 0.3, 5);
  for (std::size_t i = 0; i < 12; ++i) {
    if (spread[i] == 0.0) {
      EXPECT_EQ(est2.values[i], 0.0);
    }
  }
  EXPECT_NEAR(sum(est2.values), 1.0, 1e-12);
}

TEST(ApproxHkpr, TwoNodePathWithinBand) {
  const Graph g = graph_from_text("0 1");
  const HkprEstimate est = approx_hkpr(g, std::log(2.0), Preference({1.0, 0.0}), 0.1, 2024);
  EXPECT_LE(std::abs(est.values[0] - 0.625), 0.1 * 0.625 + 0.1);
  EXPECT_LE(std::abs(est.values[1] - 0.375), 0.1 * 0.375 + 0.1);
}

TEST(ApproxHkpr, StationaryPreference) {
  const Graph g = random_connected_graph(25, 30, 6);
  std::vector<double> pi(25);
  for (node_t i = 0; i < 25; ++i) pi[i] = g.degree(i) / static_cast<double>(g.volume());
  const double eps = 0.1;
  const HkprEstimate est = approx_hkpr(g, 2.0, Preference(pi), eps, 99);
  for (node_t i = 0; i < 25; ++i) EXPECT_LE(std::abs(est.values[i] - pi[i]), eps * pi[i] + eps);
}

TEST(ApproxHkpr, DeterministicAcrossWorkerCounts) {
  const Graph g = random_connected_graph(40, 40, 7);
  const Preference f(random_state(40, 7));
  const HkprEstimate a = approx_hkpr(g, 3.0, f, 0.3, 11);
  const HkprEstimate b = approx_hkpr(g, 3.0, f, 0.3, 11);
  const HkprEstimate c = approx_hkpr(g, 3.0, f, 0.3, 11, {std::nullopt, 3});
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.values, c.values);
  EXPECT_EQ(a.total_steps, c.total_steps);
  const HkprEstimate d = approx_hkpr(g, 3.0, f, 0.3, 12);
  EXPECT_NE(a.values, d.values);
}

TEST(ApproxHkpr, ExactMassAndStepBound) {
  const Graph g = random_connected_graph(30, 20, 8);
  const Preference f(random_state(30, 8));
  for (double t : {0.5, 4.0, 12.0}) {
    const HkprEstimate est = approx_hkpr(g, t, f, 0.3, 1);
    EXPECT_NEAR(sum(est.values), f.one_norm(), 1e-12 * f.one_norm());
    EXPECT_LE(est.total_steps, est.r_walks * est.k_cap);
    const WalkParams p = walk_params(30, 0.3, t);
    EXPECT_EQ(est.r_walks, p.r);
    EXPECT_EQ(est.k_cap, p.K);
  }
}

TEST(ApproxHkpr, SignedPreferenceIsUnbiased) {
  const Graph g = random_connected_graph(10, 8, 9);
  std::vector<double> f{1.0, -2.0, 0.5, 0.0, 0.0, 3.0, -1.0, 0.0, 0.0, 0.25};
  const double t = 1.5, eps = 0.1;
  const std::vector<double> exact = dense_hkpr(g, t, f);
  // Averaging many independent runs shrinks the noise well below the truncation bias bound.
  std::vector<double> mean(10, 0.0);
  const int runs = 10;
  std::size_t r = 0;
  for (int s = 0; s < runs; ++s) {
    const HkprEstimate est = approx_hkpr(g, t, Preference(f), eps, 1000 + s);
    r = est.r_walks;
    for (std::size_t i = 0; i < 10; ++i) mean[i] += est.values[i] / runs;
  }
  const double norm = 7.75;
  for (std::size_t i = 0; i < 10; ++i) EXPECT_NEAR(mean[i], exact[i], norm * (eps / 2 + 0.01));
  // Signed deposits cancel only in expectation: each walk moves the total by +-norm/r.
  EXPECT_NEAR(sum(mean), sum(f), 4.0 * norm / std::sqrt(static_cast<double>(r) * runs));
}

TEST(ApproxHkpr, EpsilonContractAndSupport) {
  for (double eps : {0.1, 0.3}) {
    for (std::uint64_t gseed = 0; gseed < 3; ++gseed) {
      const Graph g = random_connected_graph(20 + 10 * gseed, 15, 600 + gseed);
      const std::size_t n = g.num_nodes();
      std::vector<double> f(n, 0.0);
      f[gseed] = 1.0;
      const double t = 1.0 + gseed;
      const std::vector<double> rho = dense_hkpr(g, t, f);
      int failures = 0;
      const int runs = 20;
      for (int s = 0; s < runs; ++s) {
        const HkprEstimate est = approx_hkpr(g, t, Preference(f), eps, 7000 + s);
        bool ok = true;
        for (std::size_t i = 0; i < n; ++i) {
          const double v = est.values[i];
          if (v != 0.0) ok = ok && v >= (1 - eps) * rho[i] - eps && v <= (1 + eps) * rho[i] + eps;
          else ok = ok && rho[i] <= eps;
        }
        failures += ok ? 0 : 1;
      }
      EXPECT_LE(failures, eps * runs) << "eps=" << eps << " graph=" << gseed;
    }
  }
}

TEST(ApproxHkpr, ZeroPreferenceAndDisconnected) {
  const Graph g = random_connected_graph(6, 2, 1);
  const HkprEstimate est = approx_hkpr(g, 1.0, Preference(std::vector<double>(6, 0.0)), 0.2, 1);
  EXPECT_EQ(est.r_walks, 0u);
  EXPECT_EQ(est.values, std::vector<double>(6, 0.0));
  const Graph split = graph_from_text("0 1\n2 3");
  EXPECT_THROW(approx_hkpr(split, 1.0, Preference({1, 0, 0, 0}), 0.2, 1), precondition_error);
  EXPECT_THROW(approx_hkpr(g, 1.0, Preference({1, 0}), 0.2, 1), input_error);
}

TEST(ApproxHkprRestricted, FullSetMatchesUnrestricted) {
  const Graph g = random_connected_graph(15, 10, 12);
  const Preference f(random_state(15, 12));
  std::vector<node_t> all(15);
  std::iota(all.begin(), all.end(), 0);
  const HkprEstimate a = approx_hkpr(g, 2.0, f, 0.3, 5);
  const HkprEstimate b = approx_hkpr_restricted(g, NodeSet::of(all, 15), 2.0, f, 0.3, 5);
  EXPECT_EQ(a.values, b.values);
}

TEST(ApproxHkprRestricted, SingleFollowerSurvivesOnlyWithoutSteps) {
  const Graph g = random_connected_graph(12, 10, 13);
  const NodeSet single = NodeSet::of({5}, 12);
  const double t = 1.0;
  double mean = 0.0;
  const int runs = 10;
  std::size_t r = 0;
  for (int s = 0; s < runs; ++s) {
    const HkprEstimate est = approx_hkpr_restricted(g, single, t, Preference({2.0}), 0.1, 50 + s);
    mean += est.values[0] / runs;
    r = est.r_walks;
  }
  const double p = std::exp(-t);
  const double sigma = 2.0 * std::sqrt(p * (1 - p) / (r * runs));
  EXPECT_NEAR(mean, 2.0 * p, 5 * sigma);
}

TEST(ApproxHkprRestricted, PathMatchesDenseRestrictedSeries) {
  const Graph g = graph_from_text("a b\nb c");
  const node_t b = *g.find("b"), c = *g.find("c");
  const NodeSet followers = NodeSet::of({b, c}, 3);
  const std::vector<double> f{1.0, 0.0};
  const double t = 0.5, eps = 0.1;
  const std::size_t K = walk_params(2, eps, t).K;
  const std::vector<double> expect = clamped_restricted_expectation(g, {b, c}, f, t, K);
  // The clamp moves at most eps/2 of walk mass relative to the untruncated series.
  const std::vector<double> series = dense_hkpr(g, t, f, {b, c});
  EXPECT_LE(max_abs_diff(expect, series), eps / 2);

  std::vector<double> mean(2, 0.0);
  const int runs = 10;
  std::size_t r = 0;
  for (int s = 0; s < runs; ++s) {
    const HkprEstimate est = approx_hkpr_restricted(g, followers, t, Preference(f), eps, 90 + s);
    for (int i = 0; i < 2; ++i) mean[i] += est.values[i] / runs;
    r = est.r_walks;
    EXPECT_LE(sum(est.values), 1.0 + 1e-12);
    EXPECT_LE(est.total_steps, est.r_walks * est.k_cap);
  }
  for (int i = 0; i < 2; ++i) {
    const double sigma = std::sqrt(expect[i] * (1 - expect[i]) / (r * runs));
    EXPECT_NEAR(mean[i], expect[i], 5 * sigma + 1e-12);
  }
}

TEST(ApproxHkprRestricted, RejectsImproperSets) {
  const Graph g = graph_from_text("a b\nb c");
  EXPECT_THROW(approx_hkpr_restricted(g, NodeSet{}, 1.0, Preference(std::vector<double>{}), 0.1, 1), input_error);
  EXPECT_THROW(approx_hkpr_restricted(g, NodeSet::of({1}, 3), 1.0, Preference({1.0, 2.0}), 0.1, 1), input_error);
}
