#include "rfhnd/transport.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace rfhnd {

namespace {

struct Cell {
  std::size_t i, j;
};

void validate(std::span<const double> supply, std::span<const double> demand, const Matrix& cost) {
  if (supply.empty() || demand.empty()) throw std::invalid_argument("transport: empty supply or demand");
  if (cost.rows() != supply.size() || cost.cols() != demand.size()) {
    throw std::invalid_argument("transport: cost matrix shape does not match supply x demand");
  }
  double sa = 0.0, sb = 0.0;
  for (double v : supply) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("transport: negative or non-finite supply");
    sa += v;
  }
  for (double v : demand) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("transport: negative or non-finite demand");
    sb += v;
  }
  if (std::abs(sa - sb) > 1e-9 * std::max(1.0, std::max(sa, sb))) {
    throw std::invalid_argument("transport: unbalanced totals " + std::to_string(sa) + " vs " + std::to_string(sb));
  }
  for (double c : cost.data()) {
    if (!std::isfinite(c)) throw std::invalid_argument("transport: non-finite cost");
  }
}

}  // namespace

TransportResult solve_transport(std::span<const double> supply, std::span<const double> demand,
                                const Matrix& cost) {
  validate(supply, demand, cost);
  const std::size_t p = supply.size(), q = demand.size();

  TransportResult res;
  res.plan = Matrix(p, q);
  Matrix& x = res.plan;
  std::vector<char> basic(p * q, 0);

  // Northwest corner: a staircase of exactly p+q-1 cells, zeros included.
  {
    std::vector<double> a(supply.begin(), supply.end()), b(demand.begin(), demand.end());
    std::size_t i = 0, j = 0;
    while (true) {
      const double f = std::min(a[i], b[j]);
      x(i, j) = f;
      basic[i * q + j] = 1;
      a[i] -= f;
      b[j] -= f;
      if (i == p - 1 && j == q - 1) break;
      if (i == p - 1) {
        ++j;
      } else if (j == q - 1) {
        ++i;
      } else if (a[i] <= b[j]) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  double cmax = 1.0;
  for (double c : cost.data()) cmax = std::max(cmax, std::abs(c));
  const double tol = 1e-12 * cmax;
  const int bland_after = 50 + 4 * static_cast<int>(p * q);
  const int give_up = 1000 * static_cast<int>(p + q) + 10000;

  // Tree nodes: rows 0..p-1, columns p..p+q-1.
  const std::size_t nodes = p + q;
  std::vector<std::vector<std::size_t>> adj(nodes);
  std::vector<double> pot(nodes);
  std::vector<char> known(nodes);
  std::vector<std::size_t> parent(nodes), queue;
  queue.reserve(nodes);

  auto cell_cost = [&](std::size_t r, std::size_t c) { return r < p ? cost(r, c - p) : cost(c, r - p); };

  while (true) {
    for (auto& l : adj) l.clear();
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < q; ++j)
        if (basic[i * q + j]) {
          adj[i].push_back(p + j);
          adj[p + j].push_back(i);
        }

    // potentials u_i + v_j = c_ij on the basis
    std::fill(known.begin(), known.end(), 0);
    queue.assign(1, 0);
    pot[0] = 0.0;
    known[0] = 1;
    for (std::size_t h = 0; h < queue.size(); ++h) {
      const std::size_t s = queue[h];
      for (std::size_t t : adj[s]) {
        if (known[t]) continue;
        pot[t] = cell_cost(s, t) - pot[s];
        known[t] = 1;
        queue.push_back(t);
      }
    }
    if (queue.size() != nodes) throw std::logic_error("transport: basis is not a spanning tree");

    const bool bland = res.pivots >= bland_after;
    std::size_t ei = p, ej = q;
    double most = -tol;
    for (std::size_t i = 0; i < p && !(bland && ei < p); ++i) {
      for (std::size_t j = 0; j < q; ++j) {
        if (basic[i * q + j]) continue;
        const double r = cost(i, j) - pot[i] - pot[p + j];
        if (r < most) {
          most = r;
          ei = i;
          ej = j;
          if (bland) break;
        }
      }
    }
    if (ei == p) break;
    if (++res.pivots > give_up) throw std::runtime_error("transport: pivot limit exceeded");

    // path in the tree from column ej back to row ei
    std::fill(known.begin(), known.end(), 0);
    queue.assign(1, ei);
    known[ei] = 1;
    for (std::size_t h = 0; h < queue.size() && !known[p + ej]; ++h) {
      const std::size_t s = queue[h];
      for (std::size_t t : adj[s]) {
        if (known[t]) continue;
        known[t] = 1;
        parent[t] = s;
        queue.push_back(t);
      }
    }
    std::vector<Cell> minus, plus;
    plus.push_back({ei, ej});
    bool take = true;
    for (std::size_t v = p + ej; v != ei; v = parent[v]) {
      const std::size_t u = parent[v];
      const Cell c = v >= p ? Cell{u, v - p} : Cell{v, u - p};
      (take ? minus : plus).push_back(c);
      take = !take;
    }

    std::size_t leave = 0;
    double theta = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < minus.size(); ++k) {
      const double f = x(minus[k].i, minus[k].j);
      const std::size_t idx = minus[k].i * q + minus[k].j;
      const std::size_t cur = minus[leave].i * q + minus[leave].j;
      if (f < theta || (f == theta && idx < cur)) {
        theta = f;
        leave = k;
      }
    }
    for (const Cell& c : plus) x(c.i, c.j) += theta;
    for (const Cell& c : minus) x(c.i, c.j) = std::max(0.0, x(c.i, c.j) - theta);
    x(minus[leave].i, minus[leave].j) = 0.0;
    basic[minus[leave].i * q + minus[leave].j] = 0;
    basic[ei * q + ej] = 1;
  }

  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < q; ++j) res.cost += x(i, j) * cost(i, j);
  return res;
}

}  // namespace rfhnd
