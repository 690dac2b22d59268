#pragma once

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "rfhnd/hypergraph.hpp"

namespace testing_support {

using rfhnd::Hypergraph;
using rfhnd::Matrix;

/// Random hypergraph on n nodes with m edges of sizes in [2, max_size]; every
/// node is covered by appending leftovers to random edges.
inline Hypergraph random_hypergraph(std::mt19937_64& rng, int n, int m, int max_size) {
  std::vector<std::vector<rfhnd::NodeId>> edges(m);
  std::vector<int> nodes(n);
  std::iota(nodes.begin(), nodes.end(), 0);
  std::vector<char> covered(n, 0);
  for (auto& e : edges) {
    const int size = std::uniform_int_distribution<int>(2, std::min(max_size, n))(rng);
    std::shuffle(nodes.begin(), nodes.end(), rng);
    for (int k = 0; k < size; ++k) {
      e.push_back(nodes[k]);
      covered[nodes[k]] = 1;
    }
  }
  for (int v = 0; v < n; ++v) {
    if (covered[v]) continue;
    for (;;) {
      auto& e = edges[std::uniform_int_distribution<int>(0, m - 1)(rng)];
      if (std::find(e.begin(), e.end(), v) == e.end()) {
        e.push_back(v);
        break;
      }
    }
  }
  return Hypergraph(n, std::move(edges));
}

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix x(rows, cols);
  for (double& v : x.data()) v = g(rng);
  return x;
}

inline Matrix random_unit_rows(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  return rfhnd::normalize_rows(random_matrix(rng, rows, cols));
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t size, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(size);
  for (double& x : v) x = u(rng);
  return v;
}

inline std::vector<std::vector<int>> edge_lists(const Hypergraph& h) {
  std::vector<std::vector<int>> out;
  for (const auto& e : h.edge_lists()) out.emplace_back(e.begin(), e.end());
  return out;
}

}  // namespace testing_support
