#include "rfhnd/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace rfhnd {

void TrainConfig::validate() const {
  if (!(lr >= 0.0) || !(weight_decay >= 0.0)) throw std::invalid_argument("learning rate and weight decay must be >= 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must lie in [0, 1)");
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (train_frac < 0 || val_frac < 0 || test_frac < 0) throw std::invalid_argument("split fractions must be >= 0");
  if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9) throw std::invalid_argument("split fractions must sum to 1");
}

Split make_split(std::span<const int> labels, const TrainConfig& cfg) {
  cfg.validate();
  const std::size_t n = labels.size();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(cfg.seed ^ 0x5be1a7ULL);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(cfg.train_frac * static_cast<double>(n)));
  const auto n_val = static_cast<std::size_t>(std::llround(cfg.val_frac * static_cast<double>(n)));
  if (n_train + n_val > n) throw std::invalid_argument("degenerate split: fractions exceed node count");
  Split s;
  s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.val.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
               perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), perm.end());
  if (s.train.empty() || s.val.empty() || s.test.empty()) throw std::invalid_argument("degenerate split: empty part");
  std::set<int> classes;
  for (int i : s.train) classes.insert(labels[i]);
  if (classes.size() < 2) throw std::invalid_argument("degenerate split: train part covers fewer than 2 classes");
  return s;
}

double accuracy(const Matrix& logits, std::span<const int> labels, std::span<const int> rows) {
  if (rows.empty()) return 0.0;
  std::size_t hits = 0;
  for (int r : rows) {
    auto z = logits.row(r);
    const auto best = std::max_element(z.begin(), z.end()) - z.begin();
    if (best == labels[r]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(rows.size());
}

namespace {

std::size_t num_classes(std::span<const int> labels) {
  int mx = -1;
  for (int v : labels) {
    if (v < 0) throw std::invalid_argument("labels must be nonnegative");
    mx = std::max(mx, v);
  }
  return static_cast<std::size_t>(mx + 1);
}

struct Pass {
  double loss = 0.0;
  Matrix logits;
  std::vector<Matrix> grads;
  std::uint64_t relu_signature = 0;
};

Pass run_pass(const Hypergraph& h, const Matrix& features, std::span<const int> labels, std::span<const int> rows,
              const ModelParams& p, const ModelConfig& cfg, bool with_grad) {
  Tape t;
  Tape::Var x = t.leaf(features);
  BoundParams bp = bind(t, p, with_grad);
  ForwardVars f = model_forward(t, h, x, bp, p, cfg);
  Tape::Var loss = t.softmax_cross_entropy(f.logits, labels, rows);
  Pass out;
  out.loss = t.value(loss)(0, 0);
  out.logits = t.value(f.logits);
  out.relu_signature = t.relu_signature();
  if (with_grad) {
    t.backward(loss);
    for (Tape::Var v : bp.vars()) out.grads.push_back(t.grad(v));
  }
  return out;
}

}  // namespace

LossAndGrad loss_and_grad(const Hypergraph& h, const Matrix& features, std::span<const int> labels,
                          std::span<const int> rows, const ModelParams& p, const ModelConfig& cfg) {
  Pass pass = run_pass(h, features, labels, rows, p, cfg, true);
  return {pass.loss, std::move(pass.grads)};
}

TrainResult train(const Hypergraph& h, const Matrix& features, std::span<const int> labels, const Split& split,
                  const ModelConfig& mcfg, const TrainConfig& tcfg) {
  tcfg.validate();
  if (labels.size() != h.num_nodes() || features.rows() != h.num_nodes())
    throw std::invalid_argument("features and labels must have one row per node");
  std::set<int> classes;
  for (int i : split.train) classes.insert(labels[i]);
  if (classes.size() < 2) throw std::invalid_argument("degenerate split: train part covers fewer than 2 classes");

  TrainResult res;
  ModelParams p = init_params(mcfg, features.cols(), num_classes(labels), h.num_edges(), tcfg.seed);
  std::mt19937_64 drop_rng(tcfg.seed ^ 0xd20b0a7ULL);
  std::bernoulli_distribution keep(1.0 - tcfg.dropout);
  const double keep_scale = 1.0 / (1.0 - tcfg.dropout);

  auto record = [&](int epoch, double loss, const Matrix& logits) {
    EpochMetrics m{epoch, loss, accuracy(logits, labels, split.train), accuracy(logits, labels, split.val),
                   accuracy(logits, labels, split.test)};
    res.history.push_back(m);
    if (epoch == 0 || m.val_acc > res.best_val_acc) {
      res.best_val_acc = m.val_acc;
      res.best_epoch = epoch;
      res.test_acc = m.test_acc;
      res.params = p;
    }
  };

  for (int epoch = 0;; ++epoch) {
    const bool last = epoch == tcfg.epochs;
    const bool drop = tcfg.dropout > 0.0 && !last;
    Matrix input = features;
    if (drop) {
      for (double& v : input.data()) v = keep(drop_rng) ? v * keep_scale : 0.0;
    }
    Pass pass = run_pass(h, input, labels, split.train, p, mcfg, !last);
    if (!std::isfinite(pass.loss)) throw std::runtime_error("non-finite loss at epoch " + std::to_string(epoch));
    if (drop) {
      Pass eval = run_pass(h, features, labels, split.train, p, mcfg, false);
      record(epoch, pass.loss, eval.logits);
    } else {
      record(epoch, pass.loss, pass.logits);
    }
    if (last) break;

    auto tensors = p.tensors();
    for (std::size_t k = 0; k < tensors.size(); ++k) {
      auto& w = tensors[k]->data();
      const auto& g = pass.grads[k].data();
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= tcfg.lr * (g[i] + tcfg.weight_decay * w[i]);
    }
  }
  return res;
}

GradCheckResult gradient_check(const Hypergraph& h, const Matrix& features, std::span<const int> labels,
                               std::span<const int> rows, const ModelParams& p, const ModelConfig& cfg, int probes,
                               std::uint64_t seed, double h_step) {
  GradCheckResult res;
  const Pass base = run_pass(h, features, labels, rows, p, cfg, true);
  ModelParams work = p;
  auto tensors = work.tensors();

  // group tensors by net so every net is probed
  std::vector<std::vector<std::size_t>> groups(4);
  {
    std::size_t k = 0;
    const DenseNet* nets[] = {&p.encoder, &p.node_mlp, &p.edge_mlp, &p.decoder};
    for (std::size_t g = 0; g < 4; ++g)
      for (std::size_t l = 0; l < nets[g]->weights.size() * 2; ++l) groups[g].push_back(k++);
  }

  std::mt19937_64 rng(seed);
  const int budget = 20 * std::max(probes, 1);
  int attempts = 0;
  while (res.probes < probes && attempts < budget) {
    ++attempts;
    const auto& group = groups[static_cast<std::size_t>(res.probes) % groups.size()];
    std::size_t total = 0;
    for (std::size_t k : group) total += tensors[k]->size();
    std::size_t pick = std::uniform_int_distribution<std::size_t>(0, total - 1)(rng);
    std::size_t tk = group.front();
    for (std::size_t k : group) {
      if (pick < tensors[k]->size()) {
        tk = k;
        break;
      }
      pick -= tensors[k]->size();
    }
    double& coord = tensors[tk]->data()[pick];
    const double saved = coord;
    coord = saved + h_step;
    const Pass plus = run_pass(h, features, labels, rows, work, cfg, false);
    coord = saved - h_step;
    const Pass minus = run_pass(h, features, labels, rows, work, cfg, false);
    coord = saved;
    if (plus.relu_signature != base.relu_signature || minus.relu_signature != base.relu_signature) {
      ++res.resampled;
      continue;
    }
    const double numeric = (plus.loss - minus.loss) / (2.0 * h_step);
    const double analytic = base.grads[tk].data()[pick];
    const double err = std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), 1e-6});
    res.max_rel_error = std::max(res.max_rel_error, err);
    ++res.probes;
  }
  return res;
}

namespace {
constexpr const char* kParamsFormat = "rfhnd-params";
constexpr int kParamsVersion = 1;
}  // namespace

std::string dump_params(const ModelParams& p, const ModelConfig& cfg) {
  nlohmann::json j;
  j["format"] = kParamsFormat;
  j["version"] = kParamsVersion;
  j["config"] = {{"arch", std::string(to_string(cfg.arch))},
                 {"hidden", cfg.hidden},
                 {"tau", cfg.tau},
                 {"steps", cfg.steps},
                 {"use_cosine", cfg.use_cosine},
                 {"hypernet", cfg.hypernet},
                 {"scatter", std::string(to_string(cfg.scatter))}};
  nlohmann::json tensors = nlohmann::json::array();
  const auto names = p.tensor_names();
  const auto values = p.tensors();
  for (std::size_t k = 0; k < values.size(); ++k) {
    tensors.push_back(
        {{"name", names[k]}, {"rows", values[k]->rows()}, {"cols", values[k]->cols()}, {"data", values[k]->data()}});
  }
  j["tensors"] = tensors;
  j["fixed_kprime"] = p.fixed_kprime;
  return j.dump(1) + "\n";
}

ModelParams parse_params(const std::string& text, ModelConfig* cfg_out) {
  const auto j = nlohmann::json::parse(text);
  if (j.value("format", "") != kParamsFormat) throw std::runtime_error("not a parameter snapshot");
  if (j.value("version", 0) != kParamsVersion)
    throw std::runtime_error("unsupported parameter snapshot version " + std::to_string(j.value("version", 0)));
  const auto& c = j.at("config");
  ModelConfig cfg;
  cfg.arch = c.at("arch").get<std::string>() == "rfhnd" ? Architecture::Rfhnd : Architecture::MeanBaseline;
  cfg.hidden = c.at("hidden").get<std::size_t>();
  cfg.tau = c.at("tau").get<double>();
  cfg.steps = c.at("steps").get<int>();
  cfg.use_cosine = c.at("use_cosine").get<bool>();
  cfg.hypernet = c.at("hypernet").get<bool>();
  cfg.scatter = parse_scatter_reading(c.at("scatter").get<std::string>());

  const auto& ts = j.at("tensors");
  auto shape = [&](std::size_t k) { return std::pair{ts.at(k).at("rows").get<std::size_t>(), ts.at(k).at("cols").get<std::size_t>()}; };
  const std::size_t in_dim = shape(0).first;
  const std::size_t classes = shape(ts.size() - 1).second;
  ModelParams p = init_params(cfg, in_dim, classes, 0, 0);
  auto tensors = p.tensors();
  const auto names = p.tensor_names();
  if (ts.size() != tensors.size()) throw std::runtime_error("parameter snapshot has the wrong tensor count");
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    if (ts[k].at("name").get<std::string>() != names[k])
      throw std::runtime_error("parameter snapshot tensor " + std::to_string(k) + " is not " + names[k]);
    auto [r, cc] = shape(k);
    auto data = ts[k].at("data").get<std::vector<double>>();
    if (r != tensors[k]->rows() || cc != tensors[k]->cols())
      throw std::runtime_error("parameter snapshot shape mismatch for " + names[k]);
    *tensors[k] = Matrix(r, cc, std::move(data));
  }
  p.fixed_kprime = j.at("fixed_kprime").get<std::vector<double>>();
  if (cfg_out) *cfg_out = cfg;
  return p;
}

void save_params(const ModelParams& p, const ModelConfig& cfg, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << dump_params(p, cfg);
}

ModelParams load_params(const std::string& path, ModelConfig* cfg_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_params(ss.str(), cfg_out);
}

}  // namespace rfhnd
