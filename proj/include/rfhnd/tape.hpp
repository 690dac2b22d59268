#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "rfhnd/hypergraph.hpp"

namespace rfhnd {

/// Reverse-mode differentiation over whole matrices. Every op records its
/// output value and a closure that pushes the output adjoint into its inputs;
/// backward() replays the closures in reverse order. A tape is single use.
class Tape {
 public:
  using Var = std::size_t;

  /// Leaf value. Only leaves with `requires_grad` (and ops depending on them)
  /// receive adjoints.
  Var leaf(Matrix value, bool requires_grad = false);

  const Matrix& value(Var v) const { return nodes_[v].value; }
  /// Adjoint after backward(); zero matrix of the value's shape if untouched.
  const Matrix& grad(Var v);
  bool requires_grad(Var v) const { return nodes_[v].needs_grad; }

  Var matmul(Var a, Var b);
  /// a + broadcast of the 1 x c row `bias` onto every row.
  Var add_bias(Var a, Var bias);
  Var add(Var a, Var b);
  Var scale(Var a, double c);
  Var relu(Var a);
  /// Elementwise product with a constant (dropout masks).
  Var mul_const(Var a, Matrix mask);
  /// Unit rows; an exactly zero row maps to the constant unit row with no gradient.
  Var row_normalize(Var a);
  /// m x c: mean of member rows per edge.
  Var edge_mean(const Hypergraph& h, Var x);
  /// n x c: mean of incident edge rows per node.
  Var node_mean(const Hypergraph& h, Var e);
  /// x - tau * direction(x, kprime), kprime an m x 1 column.
  Var diffusion_step(const Hypergraph& h, Var x, Var kprime, double tau, bool use_cosine);
  /// D^{-1/2} H D_e^{-1} H^T D^{-1/2} x.
  Var hgnn_propagate(const Hypergraph& h, Var x);
  /// Mean softmax cross-entropy over the listed rows; 1 x 1.
  Var softmax_cross_entropy(Var logits, std::span<const int> labels, std::span<const int> rows);
  Var sum(Var a);

  void backward(Var out);

  /// Smallest |pre-activation| seen by relu(), and a hash of the sign pattern.
  double relu_margin() const { return relu_margin_; }
  std::uint64_t relu_signature() const { return relu_sig_; }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool needs_grad = false;
    std::function<void()> back;
  };

  Var push(Matrix value, bool needs_grad, std::function<void()> back);
  Matrix& acc(Var v);  // adjoint storage, allocated on first use

  std::vector<Node> nodes_;
  double relu_margin_ = std::numeric_limits<double>::infinity();
  std::uint64_t relu_sig_ = 1469598103934665603ULL;
};

}  // namespace rfhnd
