#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rfhnd/hypergraph.hpp"
#include "rfhnd/nn.hpp"

namespace rfhnd {

struct TrainConfig {
  double lr = 0.2;
  double weight_decay = 5e-4;
  double dropout = 0.0;  // on input features, training only
  int epochs = 300;
  std::uint64_t seed = 0;
  double train_frac = 0.5;
  double val_frac = 0.25;
  double test_frac = 0.25;

  void validate() const;
};

struct Split {
  std::vector<int> train, val, test;
};

/// Seeded random permutation cut by the fractions in `cfg`. Throws when the
/// train part covers fewer than two classes or any part is empty.
Split make_split(std::span<const int> labels, const TrainConfig& cfg);

struct EpochMetrics {
  int epoch = 0;
  double loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
  double test_acc = 0.0;
};

struct TrainResult {
  ModelParams params;  // best on validation
  std::vector<EpochMetrics> history;
  int best_epoch = 0;
  double best_val_acc = 0.0;
  double test_acc = 0.0;  // at best_epoch
};

/// Full-batch gradient descent with weight decay on mean cross-entropy over the
/// train rows. Epoch 0 in the history is the initial model. Throws
/// std::runtime_error naming the epoch on a non-finite loss.
TrainResult train(const Hypergraph& h, const Matrix& features, std::span<const int> labels, const Split& split,
                  const ModelConfig& mcfg, const TrainConfig& tcfg);

/// Loss and parameter gradients in evaluation mode (no dropout).
struct LossAndGrad {
  double loss = 0.0;
  std::vector<Matrix> grads;  // aligned with ModelParams::tensors()
};
LossAndGrad loss_and_grad(const Hypergraph& h, const Matrix& features, std::span<const int> labels,
                          std::span<const int> rows, const ModelParams& p, const ModelConfig& cfg);

double accuracy(const Matrix& logits, std::span<const int> labels, std::span<const int> rows);

struct GradCheckResult {
  double max_rel_error = 0.0;
  int probes = 0;
  int resampled = 0;  // probes redrawn because a ReLU changed state
};

/// Compares tape adjoints with central differences (step `h_step`) on
/// `probes` random scalar coordinates across all trainable tensors.
GradCheckResult gradient_check(const Hypergraph& h, const Matrix& features, std::span<const int> labels,
                               std::span<const int> rows, const ModelParams& p, const ModelConfig& cfg, int probes,
                               std::uint64_t seed, double h_step = 1e-5);

/// Versioned text snapshot of trained parameters (see README).
std::string dump_params(const ModelParams& p, const ModelConfig& cfg);
ModelParams parse_params(const std::string& text, ModelConfig* cfg_out = nullptr);
void save_params(const ModelParams& p, const ModelConfig& cfg, const std::string& path);
ModelParams load_params(const std::string& path, ModelConfig* cfg_out = nullptr);

}  // namespace rfhnd
