#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "rfhnd/curvature.hpp"
#include "rfhnd/hypergraph.hpp"
#include "rfhnd/ricci_flow.hpp"

namespace rfhnd {

enum class KprimeSource { Analytic, Learned, Fixed };
std::string_view to_string(KprimeSource s);

/// Per-edge aggregation weights driving the feature update.
struct AggregationWeights {
  std::vector<double> kprime;
  KprimeSource source = KprimeSource::Analytic;
};

struct DiffusionConfig {
  double tau = 0.1;
  int steps = 4;
  KprimeSource mode = KprimeSource::Analytic;
  bool use_cosine = true;
  double epsilon_denominator = 1e-2;  // floor on 1 - (x_i . m_ie)^2
  bool renormalize = true;
  bool force = false;  // run even if tau exceeds the step-0 bound
  CurvatureKind curvature = CurvatureKind::Forman;
  CurvatureOptions curvature_options;
  WeightRuleConfig weight_rule;
};

/// Closed-form per-member weights of one edge (lambda == 1):
///   mu = -kappa_e w_e / |e|, S_e = sum_{i,j in e} 1/sqrt(d_i d_j),
///   m_ie = (1/S_e) sum_j x_j / sqrt(d_i d_j),
///   kprime_ie = mu / (max(1 - (x_i . m_ie)^2, eps) S_e).
std::vector<double> analytic_kprime_members(const Hypergraph& h, const FeatureMatrix& x, EdgeId e, double kappa_e,
                                            double w_e, double eps);

/// Edge-level weights: mean over members of analytic_kprime_members.
AggregationWeights analytic_kprime(const Hypergraph& h, const FeatureMatrix& x, const CurvatureVector& kappa,
                                   const EdgeWeights& w, double eps);

/// row_i = sum_{e ni i} -kprime_e sum_{j in e} (x_j - cos(x_i,x_j) x_i) / sqrt(d_i d_j);
/// cos replaced by 1 when use_cosine is off.
Matrix node_update_direction(const Hypergraph& h, const FeatureMatrix& x, const AggregationWeights& kw,
                             bool use_cosine);

/// Sparse symmetric S = D^{-1/2} H K' H^T D^{-1/2} and cosine matrix C on the
/// same pattern (pairs sharing an edge, diagonal included), stored row-wise.
struct DiffusionOperator {
  std::size_t n = 0;
  std::vector<std::size_t> offsets;
  std::vector<NodeId> cols;
  std::vector<double> s;
  std::vector<double> c;

  double s_at(NodeId i, NodeId j) const;
  std::vector<double> row_sums() const;
  /// F X with F = diag((S o C) 1) - S.
  Matrix apply(const Matrix& x) const;
  Matrix dense_s() const;
  Matrix dense_c() const;
};

DiffusionOperator assemble_matrices(const Hypergraph& h, const FeatureMatrix& x, const AggregationWeights& kw,
                                    bool use_cosine = true);

/// max_i sum_j s_ij computed straight from the incidence structure.
double max_row_sum(const Hypergraph& h, const AggregationWeights& kw);

struct StabilityCertificate {
  double max_row_sum = 0.0;
  double tau_bound = 0.0;  // 0 when inapplicable
  double tau_used = 0.0;
  bool applicable = false;  // max row sum > 0
  bool stable = false;
};

StabilityCertificate stability_bound(double max_row_sum, double tau_used);
inline StabilityCertificate stability_bound(const DiffusionOperator& op, double tau_used) {
  double worst = -std::numeric_limits<double>::infinity();
  for (double v : op.row_sums()) worst = std::max(worst, v);
  return stability_bound(worst, tau_used);
}

/// X <- X - tau * direction, rows renormalised when requested. Throws
/// std::runtime_error naming `step` if a NaN appears.
FeatureMatrix euler_step(const FeatureMatrix& x, const Matrix& direction, double tau, bool renormalize, int step = 0);

/// Supplies the aggregation weights for step `step` from the current features.
using KprimeProvider = std::function<AggregationWeights(const Hypergraph&, const FeatureMatrix&, int step)>;

/// Attribute weights, curvature from them, then the closed-form kprime.
KprimeProvider analytic_provider(const DiffusionConfig& cfg);
KprimeProvider fixed_provider(std::vector<double> kprime);

struct DiffusionStep {
  int step = 0;
  double energy = 0.0;
  double max_row_sum = 0.0;
  double min_weight = 0.0;
  double max_weight = 0.0;
};

struct DiffusionResult {
  std::vector<FeatureMatrix> trajectory;  // X(0) .. X(T)
  std::vector<DiffusionStep> steps;       // one per X(t), t = 0..T
  std::vector<std::vector<double>> attribute_weights;
  std::vector<StabilityCertificate> certificates;  // one per taken step
  std::optional<EnergyReport> energy_report;      // when at least 3 samples
};

/// Runs cfg.steps Euler steps with time-varying kprime from `provider`.
/// Refuses to start (std::runtime_error) when tau exceeds the step-0 bound
/// unless cfg.force; aborts on NaN or when the Frobenius norm grows beyond
/// 1e6 times its start value.
DiffusionResult diffuse(const Hypergraph& h, const FeatureMatrix& x0, const DiffusionConfig& cfg,
                        const KprimeProvider& provider);

}  // namespace rfhnd
