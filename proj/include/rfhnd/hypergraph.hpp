#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfhnd/matrix.hpp"

namespace rfhnd {

using NodeId = std::int32_t;
using EdgeId = std::int32_t;

/// Raised for structurally invalid hypergraphs (bad indices, duplicates,
/// undersized edges, isolated nodes). The message names the offending edge or
/// node.
class HypergraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Immutable weighted-free incidence structure.
///
/// Edges are stored CSR-style as sorted node lists; the transposed incidence
/// (node -> incident edges) is built once at construction. Every node belongs
/// to at least one edge and every edge has at least two distinct members.
class Hypergraph {
 public:
  Hypergraph() = default;

  /// Validates and canonicalises (sorts) each edge. Throws HypergraphError.
  Hypergraph(std::size_t num_nodes, std::vector<std::vector<NodeId>> edges);

  std::size_t num_nodes() const noexcept { return num_nodes_; }
  std::size_t num_edges() const noexcept { return edge_offsets_.empty() ? 0 : edge_offsets_.size() - 1; }
  std::size_t num_incidences() const noexcept { return edge_nodes_.size(); }

  std::span<const NodeId> edge(EdgeId e) const {
    return {edge_nodes_.data() + edge_offsets_[e], edge_offsets_[e + 1] - edge_offsets_[e]};
  }
  std::span<const EdgeId> incident_edges(NodeId i) const {
    return {node_edges_.data() + node_offsets_[i], node_offsets_[i + 1] - node_offsets_[i]};
  }
  /// Position of node i inside each incident edge, aligned with incident_edges(i).
  std::span<const std::int32_t> incident_slots(NodeId i) const {
    return {node_slots_.data() + node_offsets_[i], node_offsets_[i + 1] - node_offsets_[i]};
  }

  std::size_t edge_size(EdgeId e) const { return edge_offsets_[e + 1] - edge_offsets_[e]; }
  std::size_t degree(NodeId i) const { return node_offsets_[i + 1] - node_offsets_[i]; }

  const std::vector<double>& inv_sqrt_degree() const noexcept { return inv_sqrt_degree_; }

  /// Sum over edges of |e|^2, the number of ordered member pairs.
  std::size_t num_member_pairs() const noexcept { return member_pairs_; }

  std::vector<std::vector<NodeId>> edge_lists() const;

  friend bool operator==(const Hypergraph& a, const Hypergraph& b) {
    return a.num_nodes_ == b.num_nodes_ && a.edge_offsets_ == b.edge_offsets_ &&
           a.edge_nodes_ == b.edge_nodes_;
  }

 private:
  std::size_t num_nodes_ = 0;
  std::vector<std::size_t> edge_offsets_;
  std::vector<NodeId> edge_nodes_;
  std::vector<std::size_t> node_offsets_;
  std::vector<EdgeId> node_edges_;
  std::vector<std::int32_t> node_slots_;
  std::vector<double> inv_sqrt_degree_;
  std::size_t member_pairs_ = 0;
};

struct DegreeVectors {
  std::vector<std::size_t> node_degree;
  std::vector<std::size_t> edge_size;
};

DegreeVectors degrees(const Hypergraph& h);

/// Per-hyperedge positive weights.
class EdgeWeights {
 public:
  EdgeWeights() = default;
  explicit EdgeWeights(std::vector<double> w);
  static EdgeWeights uniform(std::size_t m, double value = 1.0) {
    return EdgeWeights(std::vector<double>(m, value));
  }

  std::size_t size() const noexcept { return w_.size(); }
  double operator[](std::size_t e) const { return w_[e]; }
  std::span<const double> values() const noexcept { return w_; }

 private:
  std::vector<double> w_;
};

/// n x d node representations with unit-norm rows and a diffusion timestamp.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  /// Row-normalises `x`; throws std::invalid_argument naming the first zero or
  /// non-finite row.
  explicit FeatureMatrix(Matrix x, double t = 0.0);

  /// Wraps rows that the caller guarantees are already unit-norm.
  static FeatureMatrix assume_normalized(Matrix x, double t = 0.0);

  const Matrix& values() const noexcept { return x_; }
  double time() const noexcept { return t_; }
  std::size_t rows() const noexcept { return x_.rows(); }
  std::size_t cols() const noexcept { return x_.cols(); }
  std::span<const double> row(std::size_t i) const { return x_.row(i); }

 private:
  Matrix x_;
  double t_ = 0.0;
};

/// Returns a copy of `x` with every row scaled to unit Euclidean norm.
Matrix normalize_rows(const Matrix& x);
FeatureMatrix normalize_rows(const FeatureMatrix& x);

/// Cosine similarity. Identical rows give exactly 1.
inline double cosine(std::span<const double> a, std::span<const double> b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ab += a[k] * b[k];
    aa += a[k] * a[k];
    bb += b[k] * b[k];
  }
  return ab / std::sqrt(aa * bb);
}

/// True when node degrees are all equal.
bool is_regular(const Hypergraph& h);

/// Connected components of the clique expansion; returns per-node component id.
std::vector<std::int32_t> connected_components(const Hypergraph& h);

}  // namespace rfhnd
