#include "rfhnd/diffusion.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "rfhnd/kernels.hpp"

namespace rfhnd {

std::string_view to_string(KprimeSource s) {
  switch (s) {
    case KprimeSource::Analytic: return "analytic";
    case KprimeSource::Learned: return "learned";
    case KprimeSource::Fixed: return "fixed";
  }
  return "?";
}

std::vector<double> analytic_kprime_members(const Hypergraph& h, const FeatureMatrix& x, EdgeId e, double kappa_e,
                                            double w_e, double eps) {
  const auto& isd = h.inv_sqrt_degree();
  auto members = h.edge(e);
  const double size = static_cast<double>(members.size());
  const double mu = -kappa_e * w_e / size;

  double isd_sum = 0.0;
  std::vector<double> pooled(x.cols(), 0.0);  // sum_j x_j / sqrt(d_j)
  for (NodeId j : members) {
    isd_sum += isd[j];
    auto xj = x.row(j);
    for (std::size_t k = 0; k < pooled.size(); ++k) pooled[k] += isd[j] * xj[k];
  }
  const double s_e = isd_sum * isd_sum;

  std::vector<double> out;
  out.reserve(members.size());
  for (NodeId i : members) {
    const double align = isd[i] * dot(x.row(i), pooled) / s_e;  // x_i . m_ie
    const double gap = std::max(1.0 - align * align, eps);
    out.push_back(mu / (gap * s_e));
  }
  return out;
}

AggregationWeights analytic_kprime(const Hypergraph& h, const FeatureMatrix& x, const CurvatureVector& kappa,
                                   const EdgeWeights& w, double eps) {
  if (kappa.kappa.size() != h.num_edges() || w.size() != h.num_edges()) {
    throw std::invalid_argument("analytic_kprime: curvature or weights do not match the edge count");
  }
  AggregationWeights kw{std::vector<double>(h.num_edges(), 0.0), KprimeSource::Analytic};
  const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(h.num_edges());
#pragma omp parallel for schedule(dynamic, 32)
  for (std::ptrdiff_t e = 0; e < m; ++e) {
    const auto per_node = analytic_kprime_members(h, x, static_cast<EdgeId>(e), kappa.kappa[e], w[e], eps);
    double acc = 0.0;
    for (double v : per_node) acc += v;
    kw.kprime[e] = acc / static_cast<double>(per_node.size());
  }
  return kw;
}

Matrix node_update_direction(const Hypergraph& h, const FeatureMatrix& x, const AggregationWeights& kw,
                             bool use_cosine) {
  return omp::update_direction(h, x.values(), kw.kprime, use_cosine);
}

double DiffusionOperator::s_at(NodeId i, NodeId j) const {
  for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k)
    if (cols[k] == j) return s[k];
  return 0.0;
}

std::vector<double> DiffusionOperator::row_sums() const {
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) out[i] += s[k];
  return out;
}

Matrix DiffusionOperator::apply(const Matrix& x) const {
  Matrix out(x.rows(), x.cols());
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    auto row = out.row(i);
    double diag = 0.0;
    for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) {
      diag += s[k] * c[k];
      auto xj = x.row(cols[k]);
      for (std::size_t q = 0; q < row.size(); ++q) row[q] -= s[k] * xj[q];
    }
    auto xi = x.row(i);
    for (std::size_t q = 0; q < row.size(); ++q) row[q] += diag * xi[q];
  }
  return out;
}

Matrix DiffusionOperator::dense_s() const {
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) d(i, cols[k]) = s[k];
  return d;
}

Matrix DiffusionOperator::dense_c() const {
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) d(i, cols[k]) = c[k];
  return d;
}

DiffusionOperator assemble_matrices(const Hypergraph& h, const FeatureMatrix& x, const AggregationWeights& kw,
                                    bool use_cosine) {
  const auto& isd = h.inv_sqrt_degree();
  const std::size_t n = h.num_nodes();
  DiffusionOperator op;
  op.n = n;

  // pattern: for each node the sorted set of nodes sharing an edge with it
  std::vector<std::vector<NodeId>> pattern(n);
  std::vector<std::vector<double>> kmass(n);
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel
  {
    std::vector<double> acc(n, 0.0);
    std::vector<char> seen(n, 0);
#pragma omp for schedule(dynamic, 64)
    for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
      const NodeId i = static_cast<NodeId>(ii);
      auto& cols = pattern[i];
      for (EdgeId e : h.incident_edges(i)) {
        for (NodeId j : h.edge(e)) {
          if (!seen[j]) {
            seen[j] = 1;
            cols.push_back(j);
          }
          acc[j] += kw.kprime[e];
        }
      }
      std::sort(cols.begin(), cols.end());
      auto& km = kmass[i];
      km.reserve(cols.size());
      for (NodeId j : cols) {
        km.push_back(acc[j]);
        acc[j] = 0.0;
        seen[j] = 0;
      }
    }
  }

  op.offsets.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) op.offsets[i + 1] = op.offsets[i] + pattern[i].size();
  op.cols.resize(op.offsets[n]);
  op.s.resize(op.offsets[n]);
  op.c.resize(op.offsets[n]);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
    const NodeId i = static_cast<NodeId>(ii);
    std::size_t k = op.offsets[i];
    for (std::size_t p = 0; p < pattern[i].size(); ++p, ++k) {
      const NodeId j = pattern[i][p];
      op.cols[k] = j;
      // the product is formed in index order so s_ij and s_ji agree bitwise
      op.s[k] = kmass[i][p] * (isd[std::min(i, j)] * isd[std::max(i, j)]);
      op.c[k] = use_cosine ? (i == j ? 1.0 : cosine(x.row(i), x.row(j))) : 1.0;
    }
  }
  return op;
}

double max_row_sum(const Hypergraph& h, const AggregationWeights& kw) {
  const auto& isd = h.inv_sqrt_degree();
  std::vector<double> edge_isd(h.num_edges(), 0.0);
  for (std::size_t e = 0; e < h.num_edges(); ++e)
    for (NodeId j : h.edge(static_cast<EdgeId>(e))) edge_isd[e] += isd[j];
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < h.num_nodes(); ++i) {
    double r = 0.0;
    for (EdgeId e : h.incident_edges(static_cast<NodeId>(i))) r += kw.kprime[e] * edge_isd[e];
    worst = std::max(worst, r * isd[i]);
  }
  return worst;
}

StabilityCertificate stability_bound(double max_row_sum, double tau_used) {
  StabilityCertificate c;
  c.max_row_sum = max_row_sum;
  c.tau_used = tau_used;
  c.applicable = max_row_sum > 0.0;
  c.tau_bound = c.applicable ? 1.0 / max_row_sum : 0.0;
  c.stable = c.applicable && tau_used <= c.tau_bound;
  return c;
}

FeatureMatrix euler_step(const FeatureMatrix& x, const Matrix& direction, double tau, bool renormalize, int step) {
  if (!(tau > 0.0)) throw std::invalid_argument("euler_step: tau must be positive");
  if (!direction.same_shape(x.values())) throw std::invalid_argument("euler_step: direction shape mismatch");
  Matrix next = x.values();
  auto& d = next.data();
  const auto& u = direction.data();
  for (std::size_t k = 0; k < d.size(); ++k) {
    d[k] -= tau * u[k];
    if (std::isnan(d[k])) {
      std::ostringstream os;
      os << "NaN in features at diffusion step " << step;
      throw std::runtime_error(os.str());
    }
  }
  const double t = x.time() + tau;
  return renormalize ? FeatureMatrix(std::move(next), t) : FeatureMatrix::assume_normalized(std::move(next), t);
}

KprimeProvider analytic_provider(const DiffusionConfig& cfg) {
  return [cfg](const Hypergraph& h, const FeatureMatrix& x, int) {
    const auto w = attribute_weight(h, x, cfg.weight_rule);
    const auto kappa = curvature(h, w, cfg.curvature, cfg.curvature_options);
    return analytic_kprime(h, x, kappa, w, cfg.epsilon_denominator);
  };
}

KprimeProvider fixed_provider(std::vector<double> kprime) {
  return [k = std::move(kprime)](const Hypergraph& h, const FeatureMatrix&, int) {
    if (k.size() != h.num_edges()) throw std::invalid_argument("fixed kprime has the wrong length");
    return AggregationWeights{k, KprimeSource::Fixed};
  };
}

DiffusionResult diffuse(const Hypergraph& h, const FeatureMatrix& x0, const DiffusionConfig& cfg,
                        const KprimeProvider& provider) {
  if (!(cfg.tau > 0.0)) throw std::invalid_argument("diffuse: tau must be positive");
  if (cfg.steps < 0) throw std::invalid_argument("diffuse: negative step count");
  if (x0.rows() != h.num_nodes()) throw std::invalid_argument("diffuse: feature rows do not match nodes");

  DiffusionResult res;
  res.trajectory.push_back(x0);
  const double start_norm = frobenius_norm(x0.values());

  auto record = [&](const FeatureMatrix& x, int step, double row_sum) {
    const auto w = attribute_weight(h, x, cfg.weight_rule);
    DiffusionStep s;
    s.step = step;
    s.energy = dirichlet_energy(h, x);
    s.max_row_sum = row_sum;
    s.min_weight = *std::min_element(w.values().begin(), w.values().end());
    s.max_weight = *std::max_element(w.values().begin(), w.values().end());
    res.steps.push_back(s);
    res.attribute_weights.emplace_back(w.values().begin(), w.values().end());
  };

  for (int t = 0; t < cfg.steps; ++t) {
    const FeatureMatrix& x = res.trajectory.back();
    const AggregationWeights kw = provider(h, x, t);
    const auto cert = stability_bound(max_row_sum(h, kw), cfg.tau);
    if (t == 0 && cert.applicable && !cert.stable && !cfg.force) {
      std::ostringstream os;
      os << "tau " << cfg.tau << " exceeds the step-0 stability bound " << cert.tau_bound << " (use force to run anyway)";
      throw std::runtime_error(os.str());
    }
    res.certificates.push_back(cert);
    record(x, t, cert.max_row_sum);
    const Matrix dir = node_update_direction(h, x, kw, cfg.use_cosine);
    FeatureMatrix next = euler_step(x, dir, cfg.tau, cfg.renormalize, t);
    if (frobenius_norm(next.values()) > 1e6 * start_norm) {
      std::ostringstream os;
      os << "diffusion diverged at step " << t << " (norm above 1e6 times the initial norm)";
      throw std::runtime_error(os.str());
    }
    res.trajectory.push_back(std::move(next));
  }
  record(res.trajectory.back(), cfg.steps,
         res.certificates.empty() ? 0.0 : res.certificates.back().max_row_sum);

  if (res.trajectory.size() >= 3) {
    std::vector<double> times, energy;
    for (const auto& s : res.steps) {
      times.push_back(s.step * cfg.tau);
      energy.push_back(s.energy);
    }
    res.energy_report = energy_bounds(h, times, res.attribute_weights, energy, cfg.weight_rule.epsilon);
  }
  return res;
}

}  // namespace rfhnd
