#include <cmath>

#include "rfhnd/kernels.hpp"

namespace rfhnd::serial {

namespace {

void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t k = 0; k < y.size(); ++k) y[k] += a * x[k];
}

}  // namespace

Matrix edge_sum(const Hypergraph& h, const Matrix& x, std::span<const double> node_w) {
  Matrix out(h.num_edges(), x.cols());
  for (std::size_t e = 0; e < h.num_edges(); ++e) {
    for (NodeId i : h.edge(static_cast<EdgeId>(e))) {
      axpy(node_w.empty() ? 1.0 : node_w[i], x.row(i), out.row(e));
    }
  }
  return out;
}

Matrix node_sum(const Hypergraph& h, const Matrix& rows, std::span<const double> edge_w) {
  Matrix out(h.num_nodes(), rows.cols());
  for (std::size_t e = 0; e < h.num_edges(); ++e) {
    const double s = edge_w.empty() ? 1.0 : edge_w[e];
    for (NodeId i : h.edge(static_cast<EdgeId>(e))) axpy(s, rows.row(e), out.row(i));
  }
  return out;
}

Matrix update_direction(const Hypergraph& h, const Matrix& x, std::span<const double> kprime, bool use_cosine) {
  const auto& isd = h.inv_sqrt_degree();
  Matrix out(x.rows(), x.cols());
  for (std::size_t e = 0; e < h.num_edges(); ++e) {
    auto members = h.edge(static_cast<EdgeId>(e));
    for (NodeId i : members) {
      for (NodeId j : members) {
        if (i == j) continue;
        const double g = kprime[e] * isd[i] * isd[j];
        const double c = use_cosine ? cosine(x.row(i), x.row(j)) : 1.0;
        auto xi = x.row(i);
        auto xj = x.row(j);
        auto row = out.row(i);
        for (std::size_t k = 0; k < row.size(); ++k) row[k] += g * (c * xi[k] - xj[k]);
      }
    }
  }
  return out;
}

DirectionGrad update_direction_backward(const Hypergraph& h, const Matrix& x, std::span<const double> kprime,
                                        const Matrix& out_bar, bool use_cosine) {
  const auto& isd = h.inv_sqrt_degree();
  DirectionGrad g{Matrix(x.rows(), x.cols()), std::vector<double>(h.num_edges(), 0.0)};
  for (std::size_t e = 0; e < h.num_edges(); ++e) {
    auto members = h.edge(static_cast<EdgeId>(e));
    for (NodeId i : members) {
      const double a_i = dot(out_bar.row(i), x.row(i));
      for (NodeId j : members) {
        if (i == j) continue;
        const double s = isd[i] * isd[j];
        const double c = use_cosine ? cosine(x.row(i), x.row(j)) : 1.0;
        g.kprime[e] += s * (c * a_i - dot(out_bar.row(i), x.row(j)));
        axpy(kprime[e] * s * c, out_bar.row(i), g.x.row(i));
        axpy(-kprime[e] * s, out_bar.row(i), g.x.row(j));
        if (use_cosine) {
          const double c_bar = kprime[e] * s * a_i;
          const double ni = std::sqrt(dot(x.row(i), x.row(i)));
          const double nj = std::sqrt(dot(x.row(j), x.row(j)));
          axpy(c_bar / (ni * nj), x.row(j), g.x.row(i));
          axpy(-c_bar * c / (ni * ni), x.row(i), g.x.row(i));
          axpy(c_bar / (ni * nj), x.row(i), g.x.row(j));
          axpy(-c_bar * c / (nj * nj), x.row(j), g.x.row(j));
        }
      }
    }
  }
  return g;
}

std::vector<double> dirichlet_energy_terms(const Hypergraph& h, const Matrix& x) {
  const auto& isd = h.inv_sqrt_degree();
  std::vector<double> out(h.num_edges(), 0.0);
  for (std::size_t e = 0; e < h.num_edges(); ++e) {
    auto members = h.edge(static_cast<EdgeId>(e));
    double acc = 0.0;
    for (NodeId i : members) {
      for (NodeId j : members) {
        double sq = 0.0;
        for (std::size_t k = 0; k < x.cols(); ++k) {
          const double diff = x(i, k) * isd[i] - x(j, k) * isd[j];
          sq += diff * diff;
        }
        acc += sq;
      }
    }
    out[e] = 0.5 * acc / static_cast<double>(members.size());
  }
  return out;
}

std::vector<double> edge_cosine_mass(const Hypergraph& h, const Matrix& x, bool with_diagonal) {
  const auto& isd = h.inv_sqrt_degree();
  std::vector<double> out(h.num_edges(), 0.0);
  for (std::size_t e = 0; e < h.num_edges(); ++e) {
    auto members = h.edge(static_cast<EdgeId>(e));
    for (NodeId i : members) {
      for (NodeId j : members) {
        if (i == j && !with_diagonal) continue;
        out[e] += cosine(x.row(i), x.row(j)) * isd[i] * isd[j];
      }
    }
  }
  return out;
}

std::vector<double> forman_curvature(const Hypergraph& h, std::span<const double> w, bool include_self) {
  std::vector<double> out(h.num_edges(), 0.0);
  for (std::size_t e = 0; e < h.num_edges(); ++e) {
    auto members = h.edge(static_cast<EdgeId>(e));
    double sub = 0.0;
    for (NodeId k : members) {
      for (EdgeId l : h.incident_edges(k)) {
        if (static_cast<std::size_t>(l) == e && !include_self) continue;
        sub += w[e] / std::sqrt(w[l]);
      }
    }
    out[e] = static_cast<double>(members.size()) - sub;
  }
  return out;
}

}  // namespace rfhnd::serial
