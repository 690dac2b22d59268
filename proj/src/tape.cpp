#include "rfhnd/tape.hpp"

#include <cmath>
#include <stdexcept>

#include "rfhnd/kernels.hpp"

namespace rfhnd {

namespace {

using Index = std::ptrdiff_t;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// C = A B
Matrix mm(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  const Index rows = static_cast<Index>(a.rows());
#pragma omp parallel for schedule(static) if (a.rows() * b.cols() * a.cols() > 32768)
  for (Index i = 0; i < rows; ++i) {
    auto ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto bk = b.row(k);
      for (std::size_t j = 0; j < ci.size(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

// C = A^T B
Matrix mm_tn(const Matrix& a, const Matrix& b) {
  Matrix c(a.cols(), b.cols());
  const Index rows = static_cast<Index>(a.cols());
#pragma omp parallel for schedule(static) if (a.rows() * b.cols() * a.cols() > 32768)
  for (Index i = 0; i < rows; ++i) {
    auto ci = c.row(i);
    for (std::size_t k = 0; k < a.rows(); ++k) {
      const double aki = a(k, i);
      if (aki == 0.0) continue;
      auto bk = b.row(k);
      for (std::size_t j = 0; j < ci.size(); ++j) ci[j] += aki * bk[j];
    }
  }
  return c;
}

// C = A B^T
Matrix mm_nt(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.rows());
  const Index rows = static_cast<Index>(a.rows());
#pragma omp parallel for schedule(static) if (a.rows() * b.rows() * a.cols() > 32768)
  for (Index i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) c(i, j) = dot(a.row(i), b.row(j));
  }
  return c;
}

void add_into(Matrix& dst, const Matrix& src, double s = 1.0) {
  auto& d = dst.data();
  const auto& v = src.data();
  for (std::size_t k = 0; k < d.size(); ++k) d[k] += s * v[k];
}

std::vector<double> edge_sizes_inv(const Hypergraph& h) {
  std::vector<double> out(h.num_edges());
  for (std::size_t e = 0; e < out.size(); ++e) out[e] = 1.0 / static_cast<double>(h.edge_size(static_cast<EdgeId>(e)));
  return out;
}

std::vector<double> degrees_inv(const Hypergraph& h) {
  std::vector<double> out(h.num_nodes());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.0 / static_cast<double>(h.degree(static_cast<NodeId>(i)));
  return out;
}

void scale_rows(Matrix& m, std::span<const double> s) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (double& v : m.row(i)) v *= s[i];
}

}  // namespace

Tape::Var Tape::push(Matrix value, bool needs_grad, std::function<void()> back) {
  nodes_.push_back(Node{std::move(value), Matrix(), needs_grad, needs_grad ? std::move(back) : nullptr});
  return nodes_.size() - 1;
}

Matrix& Tape::acc(Var v) {
  Node& n = nodes_[v];
  if (n.grad.empty() && !n.value.empty()) n.grad = Matrix(n.value.rows(), n.value.cols());
  return n.grad;
}

const Matrix& Tape::grad(Var v) { return acc(v); }

Tape::Var Tape::leaf(Matrix value, bool requires_grad) { return push(std::move(value), requires_grad, nullptr); }

Tape::Var Tape::matmul(Var a, Var b) {
  require(value(a).cols() == value(b).rows(), "matmul: inner dimensions differ");
  Matrix out = mm(value(a), value(b));
  const bool g = requires_grad(a) || requires_grad(b);
  Var o = nodes_.size();
  return push(std::move(out), g, [this, a, b, o] {
    const Matrix& go = nodes_[o].grad;
    if (requires_grad(a)) add_into(acc(a), mm_nt(go, value(b)));
    if (requires_grad(b)) add_into(acc(b), mm_tn(value(a), go));
  });
}

Tape::Var Tape::add_bias(Var a, Var bias) {
  require(value(bias).rows() == 1 && value(bias).cols() == value(a).cols(), "add_bias: bias must be 1 x cols");
  Matrix out = value(a);
  auto b = value(bias).row(0);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += b[j];
  }
  Var o = nodes_.size();
  return push(std::move(out), requires_grad(a) || requires_grad(bias), [this, a, bias, o] {
    const Matrix& go = nodes_[o].grad;
    if (requires_grad(a)) add_into(acc(a), go);
    if (requires_grad(bias)) {
      auto gb = acc(bias).row(0);
      for (std::size_t i = 0; i < go.rows(); ++i) {
        auto r = go.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) gb[j] += r[j];
      }
    }
  });
}

Tape::Var Tape::add(Var a, Var b) {
  require(value(a).same_shape(value(b)), "add: shape mismatch");
  Matrix out = value(a);
  add_into(out, value(b));
  Var o = nodes_.size();
  return push(std::move(out), requires_grad(a) || requires_grad(b), [this, a, b, o] {
    if (requires_grad(a)) add_into(acc(a), nodes_[o].grad);
    if (requires_grad(b)) add_into(acc(b), nodes_[o].grad);
  });
}

Tape::Var Tape::scale(Var a, double c) {
  Matrix out = value(a);
  for (double& v : out.data()) v *= c;
  Var o = nodes_.size();
  return push(std::move(out), requires_grad(a), [this, a, c, o] { add_into(acc(a), nodes_[o].grad, c); });
}

Tape::Var Tape::relu(Var a) {
  Matrix out = value(a);
  for (double& v : out.data()) {
    relu_margin_ = std::min(relu_margin_, std::abs(v));
    const bool on = v > 0.0;
    relu_sig_ = (relu_sig_ ^ static_cast<std::uint64_t>(on)) * 1099511628211ULL;
    if (!on) v = 0.0;
  }
  Var o = nodes_.size();
  return push(std::move(out), requires_grad(a), [this, a, o] {
    const auto& go = nodes_[o].grad.data();
    const auto& x = value(a).data();
    auto& ga = acc(a).data();
    for (std::size_t k = 0; k < ga.size(); ++k)
      if (x[k] > 0.0) ga[k] += go[k];
  });
}

Tape::Var Tape::mul_const(Var a, Matrix mask) {
  require(value(a).same_shape(mask), "mul_const: shape mismatch");
  Matrix out = value(a);
  for (std::size_t k = 0; k < out.size(); ++k) out.data()[k] *= mask.data()[k];
  Var o = nodes_.size();
  return push(std::move(out), requires_grad(a), [this, a, o, m = std::move(mask)] {
    const auto& go = nodes_[o].grad.data();
    auto& ga = acc(a).data();
    for (std::size_t k = 0; k < ga.size(); ++k) ga[k] += go[k] * m.data()[k];
  });
}

Tape::Var Tape::row_normalize(Var a) {
  Matrix out = value(a);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    const double norm = std::sqrt(dot(r, r));
    require(std::isfinite(norm), "row_normalize: non-finite row");
    if (norm > 0.0) {
      for (double& v : r) v /= norm;
    } else {
      // fully masked inputs encode to zero before the bias has trained
      for (double& v : r) v = 1.0 / std::sqrt(static_cast<double>(r.size()));
    }
  }
  Var o = nodes_.size();
  return push(std::move(out), requires_grad(a), [this, a, o] {
    const Matrix& x = value(a);
    const Matrix& y = nodes_[o].value;
    const Matrix& go = nodes_[o].grad;
    Matrix& ga = acc(a);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const double norm = std::sqrt(dot(x.row(i), x.row(i)));
      if (!(norm > 0.0)) continue;
      const double proj = dot(y.row(i), go.row(i));
      auto gi = ga.row(i);
      auto yi = y.row(i);
      auto gr = go.row(i);
      for (std::size_t k = 0; k < gi.size(); ++k) gi[k] += (gr[k] - yi[k] * proj) / norm;
    }
  });
}

Tape::Var Tape::edge_mean(const Hypergraph& h, Var x) {
  require(value(x).rows() == h.num_nodes(), "edge_mean: rows must match nodes");
  const auto inv = edge_sizes_inv(h);
  Matrix out = omp::edge_sum(h, value(x));
  scale_rows(out, inv);
  Var o = nodes_.size();
  return push(std::move(out), requires_grad(x), [this, &h, x, o, inv] {
    add_into(acc(x), omp::node_sum(h, nodes_[o].grad, inv));
  });
}

Tape::Var Tape::node_mean(const Hypergraph& h, Var e) {
  require(value(e).rows() == h.num_edges(), "node_mean: rows must match edges");
  const auto inv = degrees_inv(h);
  Matrix out = omp::node_sum(h, value(e));
  scale_rows(out, inv);
  Var o = nodes_.size();
  return push(std::move(out), requires_grad(e), [this, &h, e, o, inv] {
    add_into(acc(e), omp::edge_sum(h, nodes_[o].grad, inv));
  });
}

Tape::Var Tape::diffusion_step(const Hypergraph& h, Var x, Var kprime, double tau, bool use_cosine) {
  require(value(x).rows() == h.num_nodes(), "diffusion_step: rows must match nodes");
  require(value(kprime).rows() == h.num_edges() && value(kprime).cols() == 1, "diffusion_step: kprime must be m x 1");
  Matrix out = value(x);
  add_into(out, omp::update_direction(h, value(x), value(kprime).data(), use_cosine), -tau);
  Var o = nodes_.size();
  return push(std::move(out), requires_grad(x) || requires_grad(kprime), [this, &h, x, kprime, tau, use_cosine, o] {
    const Matrix& go = nodes_[o].grad;
    Matrix dir_bar = go;
    for (double& v : dir_bar.data()) v *= -tau;
    auto g = omp::update_direction_backward(h, value(x), value(kprime).data(), dir_bar, use_cosine);
    if (requires_grad(x)) {
      add_into(acc(x), go);
      add_into(acc(x), g.x);
    }
    if (requires_grad(kprime)) {
      auto& gk = acc(kprime).data();
      for (std::size_t e = 0; e < gk.size(); ++e) gk[e] += g.kprime[e];
    }
  });
}

Tape::Var Tape::hgnn_propagate(const Hypergraph& h, Var x) {
  require(value(x).rows() == h.num_nodes(), "hgnn_propagate: rows must match nodes");
  const auto& isd = h.inv_sqrt_degree();
  const auto inv = edge_sizes_inv(h);
  auto apply = [&h, &isd, inv](const Matrix& m) {
    Matrix out = omp::node_sum(h, omp::edge_sum(h, m, isd), inv);
    scale_rows(out, isd);
    return out;
  };
  Matrix out = apply(value(x));
  Var o = nodes_.size();
  // the operator is symmetric, so its adjoint is itself
  return push(std::move(out), requires_grad(x), [this, x, o, apply] { add_into(acc(x), apply(nodes_[o].grad)); });
}

Tape::Var Tape::softmax_cross_entropy(Var logits, std::span<const int> labels, std::span<const int> rows) {
  const Matrix& z = value(logits);
  require(labels.size() == z.rows(), "softmax_cross_entropy: one label per row expected");
  require(!rows.empty(), "softmax_cross_entropy: no rows selected");
  Matrix prob(z.rows(), z.cols());
  double loss = 0.0;
  for (int r : rows) {
    auto zr = z.row(r);
    double mx = zr[0];
    for (double v : zr) mx = std::max(mx, v);
    double s = 0.0;
    for (std::size_t k = 0; k < zr.size(); ++k) s += std::exp(zr[k] - mx);
    for (std::size_t k = 0; k < zr.size(); ++k) prob(r, k) = std::exp(zr[k] - mx) / s;
    loss += -(zr[labels[r]] - mx - std::log(s));
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  Matrix out(1, 1, loss * inv);
  Var o = nodes_.size();
  std::vector<int> lab(labels.begin(), labels.end()), sel(rows.begin(), rows.end());
  return push(std::move(out), requires_grad(logits),
              [this, logits, o, inv, p = std::move(prob), lab = std::move(lab), sel = std::move(sel)] {
                const double g = nodes_[o].grad(0, 0) * inv;
                Matrix& gz = acc(logits);
                for (int r : sel) {
                  for (std::size_t k = 0; k < gz.cols(); ++k) {
                    gz(r, k) += g * (p(r, k) - (static_cast<int>(k) == lab[r] ? 1.0 : 0.0));
                  }
                }
              });
}

Tape::Var Tape::sum(Var a) {
  double s = 0.0;
  for (double v : value(a).data()) s += v;
  Var o = nodes_.size();
  return push(Matrix(1, 1, s), requires_grad(a), [this, a, o] {
    const double g = nodes_[o].grad(0, 0);
    for (double& v : acc(a).data()) v += g;
  });
}

void Tape::backward(Var out) {
  require(value(out).rows() == 1 && value(out).cols() == 1, "backward: output must be 1 x 1");
  acc(out)(0, 0) += 1.0;
  for (Var v = out + 1; v-- > 0;) {
    Node& n = nodes_[v];
    if (n.back && !n.grad.empty()) n.back();
  }
}

}  // namespace rfhnd
