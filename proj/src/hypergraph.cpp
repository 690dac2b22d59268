#include "rfhnd/hypergraph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

namespace rfhnd {

double frobenius_norm(const Matrix& m) {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return std::sqrt(s);
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("max_abs_diff: shape mismatch");
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    worst = std::max(worst, std::abs(a.data()[k] - b.data()[k]));
  }
  return worst;
}

Hypergraph::Hypergraph(std::size_t num_nodes, std::vector<std::vector<NodeId>> edges)
    : num_nodes_(num_nodes) {
  if (edges.empty()) throw HypergraphError("hypergraph has no edges");
  edge_offsets_.reserve(edges.size() + 1);
  edge_offsets_.push_back(0);
  std::vector<std::size_t> deg(num_nodes, 0);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    auto& members = edges[e];
    if (members.size() < 2) {
      std::ostringstream os;
      os << "edge of size " << members.size() << " < 2 in edge " << e;
      throw HypergraphError(os.str());
    }
    for (NodeId v : members) {
      if (v < 0 || static_cast<std::size_t>(v) >= num_nodes) {
        std::ostringstream os;
        os << "out-of-range node index " << v << " in edge " << e;
        throw HypergraphError(os.str());
      }
    }
    std::sort(members.begin(), members.end());
    if (std::adjacent_find(members.begin(), members.end()) != members.end()) {
      std::ostringstream os;
      os << "duplicate node in edge " << e;
      throw HypergraphError(os.str());
    }
    for (NodeId v : members) ++deg[v];
    edge_nodes_.insert(edge_nodes_.end(), members.begin(), members.end());
    edge_offsets_.push_back(edge_nodes_.size());
    member_pairs_ += members.size() * members.size();
  }
  for (std::size_t i = 0; i < num_nodes; ++i) {
    if (deg[i] == 0) {
      std::ostringstream os;
      os << "isolated node " << i;
      throw HypergraphError(os.str());
    }
  }

  node_offsets_.assign(num_nodes + 1, 0);
  for (std::size_t i = 0; i < num_nodes; ++i) node_offsets_[i + 1] = node_offsets_[i] + deg[i];
  node_edges_.resize(edge_nodes_.size());
  node_slots_.resize(edge_nodes_.size());
  std::vector<std::size_t> cursor(node_offsets_.begin(), node_offsets_.end() - 1);
  for (std::size_t e = 0; e + 1 < edge_offsets_.size(); ++e) {
    for (std::size_t k = edge_offsets_[e]; k < edge_offsets_[e + 1]; ++k) {
      const NodeId v = edge_nodes_[k];
      node_edges_[cursor[v]] = static_cast<EdgeId>(e);
      node_slots_[cursor[v]] = static_cast<std::int32_t>(k - edge_offsets_[e]);
      ++cursor[v];
    }
  }
  inv_sqrt_degree_.resize(num_nodes);
  for (std::size_t i = 0; i < num_nodes; ++i) {
    inv_sqrt_degree_[i] = 1.0 / std::sqrt(static_cast<double>(deg[i]));
  }
}

std::vector<std::vector<NodeId>> Hypergraph::edge_lists() const {
  std::vector<std::vector<NodeId>> out;
  out.reserve(num_edges());
  for (std::size_t e = 0; e < num_edges(); ++e) {
    auto members = edge(static_cast<EdgeId>(e));
    out.emplace_back(members.begin(), members.end());
  }
  return out;
}

DegreeVectors degrees(const Hypergraph& h) {
  DegreeVectors out;
  out.node_degree.resize(h.num_nodes());
  out.edge_size.resize(h.num_edges());
  for (std::size_t i = 0; i < h.num_nodes(); ++i) out.node_degree[i] = h.degree(static_cast<NodeId>(i));
  for (std::size_t e = 0; e < h.num_edges(); ++e) out.edge_size[e] = h.edge_size(static_cast<EdgeId>(e));
  return out;
}

EdgeWeights::EdgeWeights(std::vector<double> w) : w_(std::move(w)) {
  for (std::size_t e = 0; e < w_.size(); ++e) {
    if (!(w_[e] > 0.0) || !std::isfinite(w_[e])) {
      std::ostringstream os;
      os << "edge weight must be positive and finite, got " << w_[e] << " for edge " << e;
      throw std::invalid_argument(os.str());
    }
  }
}

namespace {

void normalize_in_place(Matrix& x) {
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = x.row(i);
    const double norm = std::sqrt(dot(r, r));
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      std::ostringstream os;
      os << "cannot normalise row of node " << i << " (norm " << norm << ")";
      throw std::invalid_argument(os.str());
    }
    for (double& v : r) v /= norm;
  }
}

}  // namespace

FeatureMatrix::FeatureMatrix(Matrix x, double t) : x_(std::move(x)), t_(t) {
  normalize_in_place(x_);
}

FeatureMatrix FeatureMatrix::assume_normalized(Matrix x, double t) {
  FeatureMatrix f;
  f.x_ = std::move(x);
  f.t_ = t;
  return f;
}

Matrix normalize_rows(const Matrix& x) {
  Matrix out = x;
  normalize_in_place(out);
  return out;
}

FeatureMatrix normalize_rows(const FeatureMatrix& x) {
  return FeatureMatrix(x.values(), x.time());
}

bool is_regular(const Hypergraph& h) {
  for (std::size_t i = 1; i < h.num_nodes(); ++i) {
    if (h.degree(static_cast<NodeId>(i)) != h.degree(0)) return false;
  }
  return true;
}

std::vector<std::int32_t> connected_components(const Hypergraph& h) {
  std::vector<std::int32_t> comp(h.num_nodes(), -1);
  std::vector<char> edge_seen(h.num_edges(), 0);
  std::int32_t next = 0;
  std::queue<NodeId> q;
  for (std::size_t s = 0; s < h.num_nodes(); ++s) {
    if (comp[s] >= 0) continue;
    comp[s] = next;
    q.push(static_cast<NodeId>(s));
    while (!q.empty()) {
      const NodeId v = q.front();
      q.pop();
      for (EdgeId e : h.incident_edges(v)) {
        if (edge_seen[e]) continue;
        edge_seen[e] = 1;
        for (NodeId u : h.edge(e)) {
          if (comp[u] < 0) {
            comp[u] = next;
            q.push(u);
          }
        }
      }
    }
    ++next;
  }
  return comp;
}

}  // namespace rfhnd
