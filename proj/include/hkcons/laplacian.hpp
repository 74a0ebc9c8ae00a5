#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "hkcons/graph.hpp"

namespace hkcons {

/// y = L x for the normalized Laplacian L = I - D^{-1/2} A D^{-1/2}.
inline void apply_normalized_laplacian(const Graph& g, std::span<const double> x, std::span<double> y) {
  for (node_t i = 0; i < g.num_nodes(); ++i) {
    double acc = 0.0;
    for (node_t j : g.neighbors(i)) acc += x[j] / std::sqrt(static_cast<double>(g.degree(j)));
    y[i] = x[i] - acc / std::sqrt(static_cast<double>(g.degree(i)));
  }
}

/// y = L_S x where L_S keeps the rows and columns of L indexed by the subset.
/// Degrees stay those of the whole graph.
inline void apply_restricted_laplacian(const Graph& g, const IndexMaps& maps, std::span<const double> x,
                                       std::span<double> y) {
  for (std::size_t a = 0; a < maps.to_global.size(); ++a) {
    const node_t i = maps.to_global[a];
    double acc = 0.0;
    for (node_t j : g.neighbors(i)) {
      const auto b = maps.to_local[j];
      if (b != kOutside) acc += x[static_cast<std::size_t>(b)] / std::sqrt(static_cast<double>(g.degree(j)));
    }
    y[a] = x[a] - acc / std::sqrt(static_cast<double>(g.degree(i)));
  }
}

/// Row-major dense square matrix.
struct DenseMatrix {
  std::size_t dim = 0;
  std::vector<double> data;

  explicit DenseMatrix(std::size_t d) : dim(d), data(d * d, 0.0) {}
  double& operator()(std::size_t r, std::size_t c) { return data[r * dim + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * dim + c]; }
};

inline DenseMatrix restricted_laplacian_dense(const Graph& g, const IndexMaps& maps) {
  const std::size_t s = maps.to_global.size();
  DenseMatrix m(s);
  for (std::size_t a = 0; a < s; ++a) {
    const node_t i = maps.to_global[a];
    m(a, a) = 1.0;
    for (node_t j : g.neighbors(i)) {
      const auto b = maps.to_local[j];
      if (b != kOutside) {
        m(a, static_cast<std::size_t>(b)) = -1.0 / std::sqrt(static_cast<double>(g.degree(i)) * g.degree(j));
      }
    }
  }
  return m;
}

}  // namespace hkcons
