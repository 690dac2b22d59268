#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "rfhnd/diffusion.hpp"
#include "rfhnd/hypergraph.hpp"
#include "rfhnd/tape.hpp"

namespace rfhnd {

enum class Activation { ReLU, Identity };

/// Stack of affine layers. Hidden layers use ReLU; the last one uses `output`.
struct DenseNet {
  std::vector<std::size_t> sizes;
  std::vector<Matrix> weights;  // sizes[l] x sizes[l+1]
  std::vector<Matrix> biases;   // 1 x sizes[l+1]
  Activation output = Activation::Identity;

  DenseNet() = default;
  DenseNet(std::vector<std::size_t> layer_sizes, Activation out);

  std::size_t in_dim() const { return sizes.front(); }
  std::size_t out_dim() const { return sizes.back(); }

  /// Glorot-uniform weights, zero biases.
  void init(std::mt19937_64& rng);
  bool finite() const;
};

/// How the node-side MLP sits between the scatter operations.
enum class ScatterReading {
  PoolTransformRepool,  // edge mean, MLP1, node mean, edge mean, MLP2
  PoolOnly,             // edge mean, MLP2 (MLP1 unused)
};
std::string_view to_string(ScatterReading r);
ScatterReading parse_scatter_reading(std::string_view s);

enum class Architecture { Rfhnd, MeanBaseline };
std::string_view to_string(Architecture a);

struct ModelConfig {
  Architecture arch = Architecture::Rfhnd;
  std::size_t hidden = 32;
  double tau = 0.1;
  int steps = 2;
  bool use_cosine = true;
  bool hypernet = true;  // false: fixed random kprime drawn at init
  ScatterReading scatter = ScatterReading::PoolTransformRepool;
};

/// Parses none / no-cos / no-hypernet / no-both into the two switches.
void apply_ablation(ModelConfig& cfg, std::string_view ablation);

struct ModelParams {
  DenseNet encoder;
  DenseNet node_mlp;   // hidden -> hidden, ReLU
  DenseNet edge_mlp;   // hidden -> hidden -> 1
  DenseNet decoder;
  std::vector<double> fixed_kprime;  // used when the hypernet is off; not trained

  /// Trainable tensors in a fixed order, with matching names.
  std::vector<Matrix*> tensors();
  std::vector<const Matrix*> tensors() const;
  std::vector<std::string> tensor_names() const;
  std::size_t num_scalars() const;
};

ModelParams init_params(const ModelConfig& cfg, std::size_t in_dim, std::size_t classes, std::size_t num_edges,
                        std::uint64_t seed);

/// Tape handles for a DenseNet's tensors.
struct BoundNet {
  const DenseNet* net = nullptr;
  std::vector<Tape::Var> w, b;
};

BoundNet bind(Tape& t, const DenseNet& net, bool requires_grad);
Tape::Var apply(Tape& t, const BoundNet& net, Tape::Var x);

struct BoundParams {
  BoundNet encoder, node_mlp, edge_mlp, decoder;
  /// Vars in the order of ModelParams::tensors().
  std::vector<Tape::Var> vars() const;
};

BoundParams bind(Tape& t, const ModelParams& p, bool requires_grad);

/// m x 1 column of learned aggregation weights for the current features.
Tape::Var learned_kprime(Tape& t, const Hypergraph& h, Tape::Var x, const BoundNet& node_mlp,
                         const BoundNet& edge_mlp, ScatterReading reading);

/// Value-only version of learned_kprime.
AggregationWeights forward_learned_kprime(const Hypergraph& h, const Matrix& x, const DenseNet& node_mlp,
                                          const DenseNet& edge_mlp,
                                          ScatterReading reading = ScatterReading::PoolTransformRepool);

struct ForwardVars {
  Tape::Var logits;
  Tape::Var features;  // X(T), before decoding
};

/// encode, normalise rows, `steps` diffusion (or propagation) steps, decode.
/// `x_raw` must be an n x in_dim tape value.
ForwardVars model_forward(Tape& t, const Hypergraph& h, Tape::Var x_raw, const BoundParams& p,
                          const ModelParams& values, const ModelConfig& cfg);

/// Convenience: logits only, no gradients.
Matrix model_logits(const Hypergraph& h, const Matrix& features, const ModelParams& p, const ModelConfig& cfg);

}  // namespace rfhnd
