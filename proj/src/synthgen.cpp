#include "rfhnd/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace rfhnd {

void SbmConfig::validate() const {
  if (classes != 2) throw std::invalid_argument("only two-class block models are supported");
  if (edge_size < 2) throw std::invalid_argument("edge size must be at least 2");
  if (alpha < 1 || alpha > edge_size / 2) throw std::invalid_argument("alpha must lie in [1, edge_size/2]");
  if (edge_size > nodes_per_class) throw std::invalid_argument("edge size exceeds nodes per class");
  if (edges == 0) throw std::invalid_argument("at least one edge is required");
  if (feature_dim == 0) throw std::invalid_argument("feature dimension must be positive");
  if (!(feature_std >= 0.0)) throw std::invalid_argument("feature std must be nonnegative");
  if (edges * edge_size < classes * nodes_per_class)
    throw std::invalid_argument("not enough edge slots to cover every node");
}

namespace {

// k distinct values from [0, n), Floyd's algorithm.
std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  std::unordered_set<std::size_t> chosen;
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t j = n - k; j < n; ++j) {
    const std::size_t t = std::uniform_int_distribution<std::size_t>(0, j)(rng);
    const std::size_t v = chosen.count(t) ? j : t;
    chosen.insert(v);
    out.push_back(v);
  }
  return out;
}

}  // namespace

Dataset generate_sbm(const SbmConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  const std::size_t npc = cfg.nodes_per_class;
  const std::size_t n = 2 * npc;

  std::vector<std::vector<NodeId>> edges(cfg.edges);
  std::bernoulli_distribution coin(0.5);
  for (auto& e : edges) {
    const std::size_t minority = coin(rng) ? 1 : 0;
    for (std::size_t c = 0; c < 2; ++c) {
      const std::size_t k = c == minority ? cfg.alpha : cfg.edge_size - cfg.alpha;
      for (std::size_t v : sample_distinct(npc, k, rng)) e.push_back(static_cast<NodeId>(c * npc + v));
    }
  }

  std::vector<std::size_t> deg(n, 0);
  for (const auto& e : edges)
    for (NodeId v : e) ++deg[v];
  std::uniform_int_distribution<std::size_t> pick_edge(0, cfg.edges - 1);
  for (std::size_t v = 0; v < n; ++v) {
    if (deg[v] > 0) continue;
    const std::size_t cls = v / npc;
    for (int tries = 0;; ++tries) {
      if (tries > 100000) throw std::runtime_error("could not attach isolated node " + std::to_string(v));
      auto& e = edges[pick_edge(rng)];
      auto it = std::find_if(e.begin(), e.end(), [&](NodeId u) {
        return static_cast<std::size_t>(u) / npc == cls && deg[u] > 1;
      });
      if (it == e.end()) continue;
      --deg[*it];
      *it = static_cast<NodeId>(v);
      ++deg[v];
      break;
    }
  }

  std::vector<int> labels(n);
  for (std::size_t v = 0; v < n; ++v) labels[v] = static_cast<int>(v / npc);

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> dir(cfg.feature_dim);
  double norm = 0.0;
  while (norm == 0.0) {
    for (double& v : dir) v = gauss(rng);
    norm = std::sqrt(std::inner_product(dir.begin(), dir.end(), dir.begin(), 0.0));
  }
  for (double& v : dir) v /= norm;

  Matrix x(n, cfg.feature_dim);
  for (std::size_t v = 0; v < n; ++v) {
    const double sign = labels[v] == 0 ? 1.0 : -1.0;
    auto r = x.row(v);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = sign * cfg.mean_offset * dir[k] + cfg.feature_std * gauss(rng);
  }

  Dataset d{Hypergraph(n, std::move(edges)), std::move(x), std::move(labels), std::nullopt};
  return d;
}

std::string_view to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::Gaussian: return "gaussian";
    case NoiseKind::Uniform: return "uniform";
    case NoiseKind::Mask: return "mask";
    case NoiseKind::Structure: return "structure";
  }
  return "?";
}

NoiseKind parse_noise_kind(std::string_view s) {
  for (NoiseKind k : {NoiseKind::Gaussian, NoiseKind::Uniform, NoiseKind::Mask, NoiseKind::Structure})
    if (s == to_string(k)) return k;
  throw std::invalid_argument("unknown noise kind '" + std::string(s) + "'");
}

void NoiseConfig::validate() const {
  if (!(rate >= 0.0 && rate <= 1.0)) throw std::invalid_argument("noise rate must lie in [0, 1]");
  if (!(sigma >= 0.0) || !(delta_scale >= 0.0)) throw std::invalid_argument("noise scales must be nonnegative");
}

Matrix apply_feature_noise(const Matrix& x, const NoiseConfig& cfg) {
  cfg.validate();
  if (cfg.kind == NoiseKind::Structure) throw std::invalid_argument("structure noise does not act on features");
  Matrix out = x;
  if (cfg.rate == 0.0) return out;
  std::mt19937_64 rng(cfg.seed);
  auto& v = out.data();
  switch (cfg.kind) {
    case NoiseKind::Gaussian: {
      std::normal_distribution<double> g(0.0, cfg.rate * cfg.sigma);
      for (double& a : v) a += g(rng);
      break;
    }
    case NoiseKind::Uniform: {
      const double d = cfg.rate * cfg.delta_scale;
      std::uniform_real_distribution<double> u(-d, d);
      for (double& a : v) a += u(rng);
      break;
    }
    case NoiseKind::Mask: {
      const auto k = static_cast<std::size_t>(std::llround(cfg.rate * static_cast<double>(v.size())));
      for (std::size_t idx : sample_distinct(v.size(), k, rng)) v[idx] = 0.0;
      break;
    }
    case NoiseKind::Structure: break;
  }
  return out;
}

Hypergraph apply_structure_noise(const Hypergraph& h, const NoiseConfig& cfg) {
  cfg.validate();
  if (cfg.kind != NoiseKind::Structure) throw std::invalid_argument("feature noise does not act on structure");
  if (cfg.rate == 0.0) return h;
  std::mt19937_64 rng(cfg.seed);
  const std::size_t m = h.num_edges();
  const std::size_t n = h.num_nodes();
  const auto k = static_cast<std::size_t>(std::llround(cfg.rate * static_cast<double>(m)));

  std::vector<std::size_t> sizes(m);
  for (std::size_t e = 0; e < m; ++e) sizes[e] = h.edge_size(static_cast<EdgeId>(e));
  std::uniform_int_distribution<std::size_t> pick_size(0, m - 1);

  std::vector<std::size_t> deg(n);
  for (std::size_t i = 0; i < n; ++i) deg[i] = h.degree(static_cast<NodeId>(i));

  std::vector<std::vector<NodeId>> inserted(k);
  for (auto& e : inserted) {
    const std::size_t s = std::min(sizes[pick_size(rng)], n);
    for (std::size_t v : sample_distinct(n, s, rng)) {
      e.push_back(static_cast<NodeId>(v));
      ++deg[v];
    }
  }

  std::vector<char> removed(m, 0);
  std::uniform_int_distribution<std::size_t> pick_edge(0, m - 1);
  int redraws = 0;
  for (std::size_t done = 0; done < k;) {
    const std::size_t e = pick_edge(rng);
    if (removed[e]) continue;
    auto members = h.edge(static_cast<EdgeId>(e));
    const bool isolates = std::any_of(members.begin(), members.end(), [&](NodeId v) { return deg[v] == 1; });
    if (isolates) {
      if (++redraws > 1000)
        throw std::runtime_error("structure noise: deleting " + std::to_string(k) +
                                 " edges would isolate a node (redraw budget exhausted)");
      continue;
    }
    removed[e] = 1;
    for (NodeId v : members) --deg[v];
    ++done;
  }

  std::vector<std::vector<NodeId>> edges;
  edges.reserve(m);
  for (std::size_t e = 0; e < m; ++e) {
    if (removed[e]) continue;
    auto members = h.edge(static_cast<EdgeId>(e));
    edges.emplace_back(members.begin(), members.end());
  }
  for (auto& e : inserted) edges.push_back(std::move(e));
  return Hypergraph(n, std::move(edges));
}

Dataset apply_noise(const Dataset& d, const NoiseConfig& cfg) {
  Dataset out = d;
  if (cfg.kind == NoiseKind::Structure) {
    out.graph = apply_structure_noise(d.graph, cfg);
    out.weights.reset();
  } else {
    if (!d.features) throw std::invalid_argument("feature noise needs a dataset with features");
    out.features = apply_feature_noise(*d.features, cfg);
  }
  return out;
}

std::vector<std::size_t> minority_counts(const Hypergraph& h, const std::vector<int>& labels) {
  std::vector<std::size_t> out(h.num_edges());
  for (std::size_t e = 0; e < out.size(); ++e) {
    std::vector<std::size_t> count;
    for (NodeId v : h.edge(static_cast<EdgeId>(e))) {
      const auto c = static_cast<std::size_t>(labels.at(v));
      if (count.size() <= c) count.resize(c + 1, 0);
      ++count[c];
    }
    std::size_t lo = h.edge_size(static_cast<EdgeId>(e));
    for (std::size_t c : count) lo = std::min(lo, c);
    if (std::count_if(count.begin(), count.end(), [](std::size_t c) { return c > 0; }) < 2) lo = 0;
    out[e] = lo;
  }
  return out;
}

double label_agreement(const Hypergraph& h, const std::vector<int>& labels) {
  double total = 0.0;
  for (std::size_t e = 0; e < h.num_edges(); ++e) {
    auto mem = h.edge(static_cast<EdgeId>(e));
    std::size_t same = 0, pairs = 0;
    for (std::size_t a = 0; a < mem.size(); ++a)
      for (std::size_t b = a + 1; b < mem.size(); ++b) {
        ++pairs;
        same += labels.at(mem[a]) == labels.at(mem[b]);
      }
    total += static_cast<double>(same) / static_cast<double>(pairs);
  }
  return total / static_cast<double>(h.num_edges());
}

}  // namespace rfhnd
