#include <cmath>

#include "rfhnd/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rfhnd {

int kernel_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_kernel_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

namespace omp {

namespace {

void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t k = 0; k < y.size(); ++k) y[k] += a * x[k];
}

using Index = std::ptrdiff_t;

}  // namespace

Matrix edge_sum(const Hypergraph& h, const Matrix& x, std::span<const double> node_w) {
  Matrix out(h.num_edges(), x.cols());
  const Index m = static_cast<Index>(h.num_edges());
#pragma omp parallel for schedule(static)
  for (Index e = 0; e < m; ++e) {
    auto row = out.row(e);
    for (NodeId i : h.edge(static_cast<EdgeId>(e))) axpy(node_w.empty() ? 1.0 : node_w[i], x.row(i), row);
  }
  return out;
}

Matrix node_sum(const Hypergraph& h, const Matrix& rows, std::span<const double> edge_w) {
  Matrix out(h.num_nodes(), rows.cols());
  const Index n = static_cast<Index>(h.num_nodes());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    auto row = out.row(i);
    for (EdgeId e : h.incident_edges(static_cast<NodeId>(i))) axpy(edge_w.empty() ? 1.0 : edge_w[e], rows.row(e), row);
  }
  return out;
}

Matrix update_direction(const Hypergraph& h, const Matrix& x, std::span<const double> kprime, bool use_cosine) {
  const auto& isd = h.inv_sqrt_degree();
  Matrix out(x.rows(), x.cols());
  const Index n = static_cast<Index>(h.num_nodes());
#pragma omp parallel for schedule(dynamic, 64)
  for (Index ii = 0; ii < n; ++ii) {
    const NodeId i = static_cast<NodeId>(ii);
    auto xi = x.row(i);
    auto row = out.row(i);
    for (EdgeId e : h.incident_edges(i)) {
      for (NodeId j : h.edge(e)) {
        if (j == i) continue;
        const double g = kprime[e] * isd[i] * isd[j];
        const double c = use_cosine ? cosine(xi, x.row(j)) : 1.0;
        auto xj = x.row(j);
        // termwise so identical rows cancel exactly
        for (std::size_t k = 0; k < row.size(); ++k) row[k] += g * (c * xi[k] - xj[k]);
      }
    }
  }
  return out;
}

DirectionGrad update_direction_backward(const Hypergraph& h, const Matrix& x, std::span<const double> kprime,
                                        const Matrix& out_bar, bool use_cosine) {
  const auto& isd = h.inv_sqrt_degree();
  const Index n = static_cast<Index>(h.num_nodes());
  const Index m = static_cast<Index>(h.num_edges());
  std::vector<double> a(h.num_nodes()), norm(h.num_nodes());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    a[i] = dot(out_bar.row(i), x.row(i));
    norm[i] = std::sqrt(dot(x.row(i), x.row(i)));
  }

  DirectionGrad g{Matrix(x.rows(), x.cols()), std::vector<double>(h.num_edges(), 0.0)};
#pragma omp parallel for schedule(dynamic, 64)
  for (Index ii = 0; ii < n; ++ii) {
    const NodeId i = static_cast<NodeId>(ii);
    auto xi = x.row(i);
    auto bi = out_bar.row(i);
    auto row = g.x.row(i);
    for (EdgeId e : h.incident_edges(i)) {
      for (NodeId j : h.edge(e)) {
        if (j == i) continue;
        const double s = kprime[e] * isd[i] * isd[j];
        const double c = use_cosine ? cosine(xi, x.row(j)) : 1.0;
        axpy(s * c, bi, row);
        axpy(-s, out_bar.row(j), row);
        if (use_cosine) {
          const double c_bar = s * (a[i] + a[j]);
          axpy(c_bar / (norm[i] * norm[j]), x.row(j), row);
          axpy(-c_bar * c / (norm[i] * norm[i]), xi, row);
        }
      }
    }
  }

#pragma omp parallel for schedule(dynamic, 64)
  for (Index e = 0; e < m; ++e) {
    auto members = h.edge(static_cast<EdgeId>(e));
    double acc = 0.0;
    for (NodeId i : members) {
      for (NodeId j : members) {
        if (i == j) continue;
        const double c = use_cosine ? cosine(x.row(i), x.row(j)) : 1.0;
        acc += isd[i] * isd[j] * (c * a[i] - dot(out_bar.row(i), x.row(j)));
      }
    }
    g.kprime[e] = acc;
  }
  return g;
}

std::vector<double> dirichlet_energy_terms(const Hypergraph& h, const Matrix& x) {
  const auto& isd = h.inv_sqrt_degree();
  std::vector<double> out(h.num_edges(), 0.0);
  const Index m = static_cast<Index>(h.num_edges());
#pragma omp parallel for schedule(dynamic, 64)
  for (Index e = 0; e < m; ++e) {
    auto members = h.edge(static_cast<EdgeId>(e));
    double acc = 0.0;
    for (std::size_t p = 0; p < members.size(); ++p) {
      for (std::size_t q = p + 1; q < members.size(); ++q) {
        const NodeId i = members[p], j = members[q];
        double sq = 0.0;
        for (std::size_t k = 0; k < x.cols(); ++k) {
          const double diff = x(i, k) * isd[i] - x(j, k) * isd[j];
          sq += diff * diff;
        }
        acc += sq;
      }
    }
    // ordered pairs count each unordered pair twice, cancelling the 1/2
    out[e] = acc / static_cast<double>(members.size());
  }
  return out;
}

std::vector<double> edge_cosine_mass(const Hypergraph& h, const Matrix& x, bool with_diagonal) {
  const auto& isd = h.inv_sqrt_degree();
  std::vector<double> out(h.num_edges(), 0.0);
  const Index m = static_cast<Index>(h.num_edges());
#pragma omp parallel for schedule(dynamic, 64)
  for (Index e = 0; e < m; ++e) {
    auto members = h.edge(static_cast<EdgeId>(e));
    double off = 0.0, diag = 0.0;
    for (std::size_t p = 0; p < members.size(); ++p) {
      const NodeId i = members[p];
      diag += isd[i] * isd[i];
      for (std::size_t q = p + 1; q < members.size(); ++q) {
        const NodeId j = members[q];
        off += cosine(x.row(i), x.row(j)) * isd[i] * isd[j];
      }
    }
    out[e] = 2.0 * off + (with_diagonal ? diag : 0.0);
  }
  return out;
}

std::vector<double> forman_curvature(const Hypergraph& h, std::span<const double> w, bool include_self) {
  const Index n = static_cast<Index>(h.num_nodes());
  const Index m = static_cast<Index>(h.num_edges());
  std::vector<double> reach(h.num_nodes(), 0.0);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (EdgeId l : h.incident_edges(static_cast<NodeId>(i))) s += 1.0 / std::sqrt(w[l]);
    reach[i] = s;
  }
  std::vector<double> out(h.num_edges(), 0.0);
#pragma omp parallel for schedule(static)
  for (Index e = 0; e < m; ++e) {
    auto members = h.edge(static_cast<EdgeId>(e));
    const double own = include_self ? 0.0 : 1.0 / std::sqrt(w[e]);
    double sub = 0.0;
    for (NodeId k : members) sub += reach[k] - own;
    out[e] = static_cast<double>(members.size()) - w[e] * sub;
  }
  return out;
}

}  // namespace omp
}  // namespace rfhnd
