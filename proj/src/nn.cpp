#include "rfhnd/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace rfhnd {

DenseNet::DenseNet(std::vector<std::size_t> layer_sizes, Activation out) : sizes(std::move(layer_sizes)), output(out) {
  if (sizes.size() < 2) throw std::invalid_argument("DenseNet needs at least input and output sizes");
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    if (sizes[l] == 0 || sizes[l + 1] == 0) throw std::invalid_argument("DenseNet layer of width 0");
    weights.emplace_back(sizes[l], sizes[l + 1]);
    biases.emplace_back(1, sizes[l + 1]);
  }
}

void DenseNet::init(std::mt19937_64& rng) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const double a = std::sqrt(6.0 / static_cast<double>(sizes[l] + sizes[l + 1]));
    std::uniform_real_distribution<double> u(-a, a);
    for (double& v : weights[l].data()) v = u(rng);
    biases[l].fill(0.0);
  }
}

bool DenseNet::finite() const {
  for (const auto* group : {&weights, &biases})
    for (const Matrix& m : *group)
      for (double v : m.data())
        if (!std::isfinite(v)) return false;
  return true;
}

std::string_view to_string(ScatterReading r) {
  return r == ScatterReading::PoolOnly ? "pool-only" : "pool-transform-repool";
}

ScatterReading parse_scatter_reading(std::string_view s) {
  if (s == "pool-transform-repool") return ScatterReading::PoolTransformRepool;
  if (s == "pool-only") return ScatterReading::PoolOnly;
  throw std::invalid_argument("unknown scatter reading '" + std::string(s) + "'");
}

std::string_view to_string(Architecture a) { return a == Architecture::Rfhnd ? "rfhnd" : "mean-baseline"; }

void apply_ablation(ModelConfig& cfg, std::string_view ablation) {
  if (ablation == "none") {
    cfg.use_cosine = true;
    cfg.hypernet = true;
  } else if (ablation == "no-cos") {
    cfg.use_cosine = false;
    cfg.hypernet = true;
  } else if (ablation == "no-hypernet") {
    cfg.use_cosine = true;
    cfg.hypernet = false;
  } else if (ablation == "no-both") {
    cfg.use_cosine = false;
    cfg.hypernet = false;
  } else {
    throw std::invalid_argument("unknown ablation '" + std::string(ablation) + "'");
  }
}

std::vector<Matrix*> ModelParams::tensors() {
  std::vector<Matrix*> out;
  for (DenseNet* net : {&encoder, &node_mlp, &edge_mlp, &decoder}) {
    for (std::size_t l = 0; l < net->weights.size(); ++l) {
      out.push_back(&net->weights[l]);
      out.push_back(&net->biases[l]);
    }
  }
  return out;
}

std::vector<const Matrix*> ModelParams::tensors() const {
  auto mut = const_cast<ModelParams*>(this)->tensors();
  return {mut.begin(), mut.end()};
}

std::vector<std::string> ModelParams::tensor_names() const {
  std::vector<std::string> out;
  const std::pair<const char*, const DenseNet*> nets[] = {
      {"encoder", &encoder}, {"node_mlp", &node_mlp}, {"edge_mlp", &edge_mlp}, {"decoder", &decoder}};
  for (const auto& [name, net] : nets) {
    for (std::size_t l = 0; l < net->weights.size(); ++l) {
      out.push_back(std::string(name) + "." + std::to_string(l) + ".weight");
      out.push_back(std::string(name) + "." + std::to_string(l) + ".bias");
    }
  }
  return out;
}

std::size_t ModelParams::num_scalars() const {
  std::size_t s = 0;
  for (const Matrix* m : tensors()) s += m->size();
  return s;
}

ModelParams init_params(const ModelConfig& cfg, std::size_t in_dim, std::size_t classes, std::size_t num_edges,
                        std::uint64_t seed) {
  if (cfg.hidden == 0) throw std::invalid_argument("hidden dimension must be positive");
  std::mt19937_64 rng(seed);
  ModelParams p;
  p.encoder = DenseNet({in_dim, cfg.hidden}, Activation::Identity);
  p.node_mlp = DenseNet({cfg.hidden, cfg.hidden}, Activation::ReLU);
  p.edge_mlp = DenseNet({cfg.hidden, cfg.hidden, 1}, Activation::Identity);
  p.decoder = DenseNet({cfg.hidden, classes}, Activation::Identity);
  p.encoder.init(rng);
  p.node_mlp.init(rng);
  p.edge_mlp.init(rng);
  p.decoder.init(rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  p.fixed_kprime.resize(num_edges);
  for (double& v : p.fixed_kprime) v = u(rng);
  return p;
}

BoundNet bind(Tape& t, const DenseNet& net, bool requires_grad) {
  BoundNet b;
  b.net = &net;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    b.w.push_back(t.leaf(net.weights[l], requires_grad));
    b.b.push_back(t.leaf(net.biases[l], requires_grad));
  }
  return b;
}

Tape::Var apply(Tape& t, const BoundNet& net, Tape::Var x) {
  if (t.value(x).cols() != net.net->in_dim()) throw std::invalid_argument("DenseNet input width mismatch");
  const std::size_t layers = net.w.size();
  for (std::size_t l = 0; l < layers; ++l) {
    x = t.add_bias(t.matmul(x, net.w[l]), net.b[l]);
    const bool last = l + 1 == layers;
    if (!last || net.net->output == Activation::ReLU) x = t.relu(x);
  }
  return x;
}

std::vector<Tape::Var> BoundParams::vars() const {
  std::vector<Tape::Var> out;
  for (const BoundNet* net : {&encoder, &node_mlp, &edge_mlp, &decoder}) {
    for (std::size_t l = 0; l < net->w.size(); ++l) {
      out.push_back(net->w[l]);
      out.push_back(net->b[l]);
    }
  }
  return out;
}

BoundParams bind(Tape& t, const ModelParams& p, bool requires_grad) {
  return {bind(t, p.encoder, requires_grad), bind(t, p.node_mlp, requires_grad), bind(t, p.edge_mlp, requires_grad),
          bind(t, p.decoder, requires_grad)};
}

Tape::Var learned_kprime(Tape& t, const Hypergraph& h, Tape::Var x, const BoundNet& node_mlp,
                         const BoundNet& edge_mlp, ScatterReading reading) {
  Tape::Var pooled = t.edge_mean(h, x);
  if (reading == ScatterReading::PoolTransformRepool) {
    Tape::Var q = apply(t, node_mlp, pooled);
    pooled = t.edge_mean(h, t.node_mean(h, q));
  }
  return apply(t, edge_mlp, pooled);
}

AggregationWeights forward_learned_kprime(const Hypergraph& h, const Matrix& x, const DenseNet& node_mlp,
                                          const DenseNet& edge_mlp, ScatterReading reading) {
  if (x.rows() != h.num_nodes()) throw std::invalid_argument("feature rows do not match node count");
  if (edge_mlp.out_dim() != 1) throw std::invalid_argument("edge MLP must end in a single output");
  const std::size_t width = reading == ScatterReading::PoolOnly ? edge_mlp.in_dim() : node_mlp.in_dim();
  if (x.cols() != width) throw std::invalid_argument("feature width does not match hypernet input");
  Tape t;
  Tape::Var xv = t.leaf(x);
  Tape::Var k = learned_kprime(t, h, xv, bind(t, node_mlp, false), bind(t, edge_mlp, false), reading);
  return {t.value(k).data(), KprimeSource::Learned};
}

ForwardVars model_forward(Tape& t, const Hypergraph& h, Tape::Var x_raw, const BoundParams& p,
                          const ModelParams& values, const ModelConfig& cfg) {
  if (t.value(x_raw).rows() != h.num_nodes()) throw std::invalid_argument("feature rows do not match node count");
  if (cfg.steps < 0) throw std::invalid_argument("steps must be nonnegative");
  Tape::Var x = t.row_normalize(apply(t, p.encoder, x_raw));

  Tape::Var fixed = 0;
  const bool use_fixed = cfg.arch == Architecture::Rfhnd && !cfg.hypernet;
  if (use_fixed) {
    if (values.fixed_kprime.size() != h.num_edges())
      throw std::invalid_argument("fixed kprime length does not match edge count");
    fixed = t.leaf(Matrix(h.num_edges(), 1, values.fixed_kprime));
  }

  for (int s = 0; s < cfg.steps; ++s) {
    if (cfg.arch == Architecture::MeanBaseline) {
      x = t.hgnn_propagate(h, x);
    } else {
      Tape::Var k = use_fixed ? fixed : learned_kprime(t, h, x, p.node_mlp, p.edge_mlp, cfg.scatter);
      x = t.row_normalize(t.diffusion_step(h, x, k, cfg.tau, cfg.use_cosine));
    }
  }
  return {apply(t, p.decoder, x), x};
}

Matrix model_logits(const Hypergraph& h, const Matrix& features, const ModelParams& p, const ModelConfig& cfg) {
  Tape t;
  Tape::Var x = t.leaf(features);
  return t.value(model_forward(t, h, x, bind(t, p, false), p, cfg).logits);
}

}  // namespace rfhnd
