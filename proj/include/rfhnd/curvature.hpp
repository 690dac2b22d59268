#pragma once

#include <string_view>
#include <utility>
#include <vector>

#include "rfhnd/hypergraph.hpp"

namespace rfhnd {

enum class CurvatureKind { Forman, Ollivier };

CurvatureKind parse_curvature_kind(std::string_view name);
std::string_view to_string(CurvatureKind k);

struct CurvatureVector {
  std::vector<double> kappa;
  CurvatureKind kind = CurvatureKind::Forman;
};

struct CurvatureOptions {
  // Forman: count the edge itself among the edges attached to each member.
  bool forman_include_self = false;
  // Ollivier: keep the walk's mass on the starting node instead of
  // renormalising it over the neighbours.
  bool keep_self_mass = false;
};

/// kappa_e = |e| - sum_{k in e} sum_{l ni k, l != e} w_e / sqrt(w_l).
CurvatureVector forman_curvature(const Hypergraph& h, const EdgeWeights& w, const CurvatureOptions& opt = {});

/// Probability measure of a weighted two-step walk from one node.
struct NodeMeasure {
  std::vector<NodeId> support;  // sorted, distinct
  std::vector<double> mass;
};

/// mu_i(j) proportional to sum over edges holding both i and j of w_e / |e|.
NodeMeasure node_measure(const Hypergraph& h, const EdgeWeights& w, NodeId i, bool keep_self_mass = false);

/// Hop distances on the clique expansion. BFS rows are computed on demand and
/// cached; prepare() fills a batch of rows in parallel so that later lookups
/// through distance() are read-only.
class HopMetric {
 public:
  explicit HopMetric(const Hypergraph& h);

  void prepare(const std::vector<NodeId>& sources);
  /// -1 when unreachable. Computes and caches the row of `a` if neither row is
  /// cached yet (not thread-safe in that case).
  int distance(NodeId a, NodeId b);
  int distance_cached(NodeId a, NodeId b) const;

 private:
  std::vector<int> bfs(NodeId s) const;

  const Hypergraph* h_;
  std::vector<std::vector<int>> rows_;
};

/// Exact 1-Wasserstein distance under the hop metric. Throws std::runtime_error
/// naming the pair when two support nodes are disconnected.
double wasserstein1(const NodeMeasure& a, const NodeMeasure& b, HopMetric& d);

/// kappa_e = 1 - 2/(|e|(|e|-1)) sum_{i<j in e} W1(mu_i, mu_j) / d(i, j).
CurvatureVector ollivier_curvature(const Hypergraph& h, const EdgeWeights& w, const CurvatureOptions& opt = {});

CurvatureVector curvature(const Hypergraph& h, const EdgeWeights& w, CurvatureKind kind,
                          const CurvatureOptions& opt = {});

}  // namespace rfhnd
