#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "rfhnd/io.hpp"
#include "rfhnd/nn.hpp"
#include "rfhnd/synthgen.hpp"
#include "rfhnd/train.hpp"

namespace rfhnd {

/// Commit the library was built from.
const char* build_git_hash();

struct TrialResult {
  double test_acc = 0.0;
  double val_acc = 0.0;
  int best_epoch = 0;
  double energy_initial = 0.0;   // normalised encoder output, best params
  double energy_terminal = 0.0;  // X(T) of the best params
  double seconds = 0.0;
};

/// Split, train and evaluate once. The split and initialisation use tcfg.seed.
TrialResult run_trial(const Dataset& d, const ModelConfig& mcfg, const TrainConfig& tcfg);

/// Where suites write and how they report progress.
struct SuiteContext {
  std::filesystem::path out_dir = ".";
  bool resume = true;  // reuse cached per-run results under out_dir/runs
  std::function<void(const std::string&)> log;
};

/// A named model variant inside a suite.
struct Variant {
  std::string name;
  ModelConfig model;
};

/// Default variants: learned-mode RFHND and the mean-aggregation baseline,
/// sharing hidden width, depth and step size.
std::vector<Variant> default_variants(const ModelConfig& rfhnd);
std::vector<Variant> ablation_variants(const ModelConfig& rfhnd);

struct AccuracyGridSpec {
  SbmConfig sbm;
  std::vector<std::size_t> alphas{1, 7};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<Variant> variants;
  TrainConfig train;
};

struct AccuracyRow {
  std::string variant;
  std::size_t alpha = 0;
  std::uint64_t seed = 0;
  TrialResult result;
};

/// Every variant on every (alpha, seed) SBM draw. Writes accuracy.csv.
std::vector<AccuracyRow> run_accuracy_grid(const AccuracyGridSpec& spec, const SuiteContext& ctx,
                                           const std::string& csv_name = "accuracy.csv");

struct OversmoothSpec {
  SbmConfig sbm;
  std::vector<int> depths{2, 4, 10, 20, 30, 40};
  std::vector<std::uint64_t> seeds{0};
  ModelConfig model;  // RFHND settings; the baseline copies width and tau
  TrainConfig train = deep_train_config();

  /// Unrolling 40 steps makes lr 0.2 diverge on the first update.
  static TrainConfig deep_train_config() {
    TrainConfig t;
    t.lr = 0.02;
    return t;
  }
};

struct OversmoothRow {
  std::string variant;
  int depth = 0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;  // NaN on the depth-0 row
  double energy = 0.0;
};

/// Trains both models per depth; a depth-0 row per seed holds the energy of
/// the row-normalised raw features. Writes oversmooth.csv.
std::vector<OversmoothRow> run_oversmooth_suite(const OversmoothSpec& spec, const SuiteContext& ctx);

struct RobustnessSpec {
  SbmConfig sbm;
  std::vector<NoiseKind> kinds{NoiseKind::Gaussian, NoiseKind::Uniform, NoiseKind::Mask, NoiseKind::Structure};
  std::vector<double> rates{0.0, 0.1, 0.2, 0.3, 0.4};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  ModelConfig model;
  TrainConfig train;
};

struct RobustnessRow {
  std::string variant;
  NoiseKind kind = NoiseKind::Gaussian;
  double rate = 0.0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
};

struct RobustnessSummary {
  std::string variant;
  NoiseKind kind = NoiseKind::Gaussian;
  double rate = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;
};

/// Writes robustness.csv (per seed) and robustness_summary.csv.
std::vector<RobustnessRow> run_robustness_suite(const RobustnessSpec& spec, const SuiteContext& ctx);
std::vector<RobustnessSummary> summarize(const std::vector<RobustnessRow>& rows);

struct ComplexitySpec {
  std::vector<std::size_t> edges{250, 500, 1000, 2000, 4000};
  std::size_t edge_size = 15;
  std::size_t feature_dim = 16;
  std::vector<std::size_t> dims{8, 16, 32, 64, 128};
  std::size_t edges_for_dim_sweep = 1000;
  int repeats = 15;
  std::uint64_t seed = 0;
};

struct ComplexityRow {
  std::string sweep;  // "m" or "d"
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t d = 0;
  double seconds_per_step = 0.0;  // median over repeats
};

struct ComplexityResult {
  std::vector<ComplexityRow> rows;
  double slope_m = 0.0;
  double slope_d = 0.0;
};

/// Times one learned-mode diffusion step (hypernet, update, renormalisation)
/// on SBM instances with n = 2.5 m nodes. Writes complexity.csv.
ComplexityResult run_complexity_probe(const ComplexitySpec& spec, const SuiteContext& ctx);

/// Median wall time of one learned-mode step on (h, x).
double time_learned_step(const Hypergraph& h, const Matrix& x, const ModelParams& p, const ModelConfig& cfg,
                         int repeats);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

double mean(const std::vector<double>& v);
double sample_stddev(const std::vector<double>& v);

/// CSV with a header row plus `<csv>.meta.json` holding git hash, config and seed.
void write_csv_with_sidecar(const std::filesystem::path& csv, const std::vector<std::string>& header,
                            const std::vector<std::vector<std::string>>& rows, const std::string& config_json,
                            std::uint64_t seed);

std::string to_json(const SbmConfig& c);
std::string to_json(const ModelConfig& c);
std::string to_json(const TrainConfig& c);

}  // namespace rfhnd
