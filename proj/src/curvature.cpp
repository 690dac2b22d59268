#include "rfhnd/curvature.hpp"

#include <algorithm>
#include <exception>
#include <map>
#include <stdexcept>
#include <string>

#include "rfhnd/kernels.hpp"
#include "rfhnd/transport.hpp"

namespace rfhnd {

CurvatureKind parse_curvature_kind(std::string_view name) {
  if (name == "forman") return CurvatureKind::Forman;
  if (name == "ollivier") return CurvatureKind::Ollivier;
  throw std::invalid_argument("unknown curvature kind '" + std::string(name) + "' (forman|ollivier)");
}

std::string_view to_string(CurvatureKind k) { return k == CurvatureKind::Forman ? "forman" : "ollivier"; }

namespace {

void check_weights(const Hypergraph& h, const EdgeWeights& w) {
  if (w.size() != h.num_edges()) {
    throw std::invalid_argument("expected " + std::to_string(h.num_edges()) + " edge weights, got " +
                                std::to_string(w.size()));
  }
}

}  // namespace

CurvatureVector forman_curvature(const Hypergraph& h, const EdgeWeights& w, const CurvatureOptions& opt) {
  check_weights(h, w);
  return {omp::forman_curvature(h, w.values(), opt.forman_include_self), CurvatureKind::Forman};
}

NodeMeasure node_measure(const Hypergraph& h, const EdgeWeights& w, NodeId i, bool keep_self_mass) {
  check_weights(h, w);
  double total = 0.0;
  for (EdgeId e : h.incident_edges(i)) total += w[e];
  std::map<NodeId, double> acc;
  for (EdgeId e : h.incident_edges(i)) {
    const double share = w[e] / total / static_cast<double>(h.edge_size(e));
    for (NodeId j : h.edge(e)) {
      if (j == i && !keep_self_mass) continue;
      acc[j] += share;
    }
  }
  double sum = 0.0;
  for (const auto& kv : acc) sum += kv.second;
  NodeMeasure mu;
  mu.support.reserve(acc.size());
  mu.mass.reserve(acc.size());
  for (const auto& [j, m] : acc) {
    mu.support.push_back(j);
    mu.mass.push_back(m / sum);
  }
  return mu;
}

HopMetric::HopMetric(const Hypergraph& h) : h_(&h), rows_(h.num_nodes()) {}

std::vector<int> HopMetric::bfs(NodeId s) const {
  std::vector<int> dist(h_->num_nodes(), -1);
  std::vector<char> edge_seen(h_->num_edges(), 0);
  std::vector<NodeId> frontier{s}, next;
  dist[s] = 0;
  for (int level = 1; !frontier.empty(); ++level) {
    next.clear();
    for (NodeId v : frontier) {
      for (EdgeId e : h_->incident_edges(v)) {
        if (edge_seen[e]) continue;
        edge_seen[e] = 1;
        for (NodeId u : h_->edge(e)) {
          if (dist[u] < 0) {
            dist[u] = level;
            next.push_back(u);
          }
        }
      }
    }
    frontier.swap(next);
  }
  return dist;
}

void HopMetric::prepare(const std::vector<NodeId>& sources) {
  std::vector<NodeId> todo;
  for (NodeId s : sources)
    if (rows_[s].empty()) todo.push_back(s);
  std::sort(todo.begin(), todo.end());
  todo.erase(std::unique(todo.begin(), todo.end()), todo.end());
  const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(todo.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t k = 0; k < count; ++k) rows_[todo[k]] = bfs(todo[k]);
}

int HopMetric::distance(NodeId a, NodeId b) {
  if (rows_[a].empty() && rows_[b].empty()) rows_[a] = bfs(a);
  return distance_cached(a, b);
}

int HopMetric::distance_cached(NodeId a, NodeId b) const {
  if (!rows_[a].empty()) return rows_[a][b];
  if (!rows_[b].empty()) return rows_[b][a];
  throw std::logic_error("HopMetric: row not prepared for node " + std::to_string(a));
}

namespace {

double w1_with(const NodeMeasure& a, const NodeMeasure& b, const auto& dist) {
  Matrix cost(a.support.size(), b.support.size());
  for (std::size_t u = 0; u < a.support.size(); ++u) {
    for (std::size_t v = 0; v < b.support.size(); ++v) {
      const int d = dist(a.support[u], b.support[v]);
      if (d < 0) {
        throw std::runtime_error("unreachable support pair (" + std::to_string(a.support[u]) + ", " +
                                 std::to_string(b.support[v]) + ")");
      }
      cost(u, v) = d;
    }
  }
  return solve_transport(a.mass, b.mass, cost).cost;
}

}  // namespace

double wasserstein1(const NodeMeasure& a, const NodeMeasure& b, HopMetric& d) {
  return w1_with(a, b, [&](NodeId x, NodeId y) { return d.distance(x, y); });
}

CurvatureVector ollivier_curvature(const Hypergraph& h, const EdgeWeights& w, const CurvatureOptions& opt) {
  check_weights(h, w);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(h.num_nodes());
  const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(h.num_edges());
  std::vector<NodeMeasure> mu(h.num_nodes());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) mu[i] = node_measure(h, w, static_cast<NodeId>(i), opt.keep_self_mass);

  HopMetric metric(h);
  std::vector<NodeId> sources;
  for (const auto& m_i : mu) sources.insert(sources.end(), m_i.support.begin(), m_i.support.end());
  for (std::size_t i = 0; i < h.num_nodes(); ++i) sources.push_back(static_cast<NodeId>(i));
  metric.prepare(sources);

  CurvatureVector out{std::vector<double>(h.num_edges(), 0.0), CurvatureKind::Ollivier};
  const auto dist = [&](NodeId x, NodeId y) { return metric.distance_cached(x, y); };
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t e = 0; e < m; ++e) {
    try {
      auto members = h.edge(static_cast<EdgeId>(e));
      const double k = static_cast<double>(members.size());
      double acc = 0.0;
      for (std::size_t p = 0; p < members.size(); ++p) {
        for (std::size_t q = p + 1; q < members.size(); ++q) {
          const int d = dist(members[p], members[q]);
          if (d <= 0) {
            throw std::runtime_error("disconnected pair (" + std::to_string(members[p]) + ", " +
                                     std::to_string(members[q]) + ") in edge " + std::to_string(e));
          }
          acc += w1_with(mu[members[p]], mu[members[q]], dist) / d;
        }
      }
      out.kappa[e] = 1.0 - 2.0 / (k * (k - 1.0)) * acc;
    } catch (...) {
#pragma omp critical(rfhnd_ollivier_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

CurvatureVector curvature(const Hypergraph& h, const EdgeWeights& w, CurvatureKind kind,
                          const CurvatureOptions& opt) {
  return kind == CurvatureKind::Forman ? forman_curvature(h, w, opt) : ollivier_curvature(h, w, opt);
}

}  // namespace rfhnd
