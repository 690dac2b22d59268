#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rfhnd/curvature.hpp"
#include "rfhnd/hypergraph.hpp"

namespace rfhnd {

enum class PairConvention { OrderedWithDiagonal, UnorderedStrict };

struct WeightRuleConfig {
  double epsilon = 1e-3;
  PairConvention pairs = PairConvention::OrderedWithDiagonal;
};

/// Feature-coupled edge weight
///   w_e = (1/alpha_e) (1/|e|) sum_{i,j in e} cos(x_i,x_j)/sqrt(d_i d_j) + 1 + epsilon
/// with alpha_e = (1/|e|) sum_{i,j in e} 1/sqrt(d_i d_j). Lies in [epsilon, 2+epsilon].
EdgeWeights attribute_weight(const Hypergraph& h, const FeatureMatrix& x, const WeightRuleConfig& cfg = {});

/// w_e <- w_e - dt kappa_e w_e. Throws std::domain_error naming the first edge
/// whose weight would become nonpositive, with the largest admissible dt.
EdgeWeights weight_flow_step(const EdgeWeights& w, const CurvatureVector& kappa, double dt);

/// E = 1/2 sum_e sum_{i,j in e} (1/|e|) |x_i/sqrt(d_i) - x_j/sqrt(d_j)|^2.
double dirichlet_energy(const Hypergraph& h, const Matrix& x);
inline double dirichlet_energy(const Hypergraph& h, const FeatureMatrix& x) { return dirichlet_energy(h, x.values()); }

/// Structure-only per-edge constants tying the energy to the weights:
/// E = sum_e (c_e - alpha_e w_e) for unit-norm rows and ordered pairs.
struct EdgeEnergyConstants {
  std::vector<double> alpha;   // (1/|e|) sum_{i,j} 1/sqrt(d_i d_j)
  std::vector<double> spread;  // sum_{i,j} (1/(2|e|)) (1/d_i + 1/d_j) = sum_{i in e} 1/d_i
  std::vector<double> c;       // spread + (1 + epsilon) alpha
};
EdgeEnergyConstants edge_energy_constants(const Hypergraph& h, double epsilon);

/// Window length of the shortest monotone stretch of a sampled trace.
/// Extrema are sign changes of the differences, ignoring steps below `dead_band`.
/// With two or more extrema this is the shortest gap between consecutive
/// extrema; with one it is the shorter of the two pieces; otherwise the whole
/// window.
struct MonotoneSegments {
  std::vector<double> extrema_times;
  double shortest = 0.0;
  bool monotone = true;
};
MonotoneSegments monotone_segments(const std::vector<double>& times, const std::vector<double>& values,
                                   double dead_band = 1e-10);

/// Trapezoid mean of a sampled trace over its window.
double trapezoid_mean(const std::vector<double>& times, const std::vector<double>& values);

enum class BoundForm { MonotoneMain, General };
std::string_view to_string(BoundForm f);

struct EnergyReport {
  std::vector<double> times;
  std::vector<double> energy;
  double mean_energy = 0.0;
  BoundForm form = BoundForm::General;
  double upper = 0.0;  // B1 of the applied form
  double lower = 0.0;  // B2 of the applied form
  double general_upper = 0.0;
  double general_lower = 0.0;
  double main_upper = 0.0;
  double main_lower = 0.0;
  bool regular = false;
  std::vector<double> rho, zeta, c, alpha;
  bool within() const { return lower <= mean_energy && mean_energy <= upper; }
};

/// Builds the energy certificate from weight and energy trajectories sampled on
/// a common grid. Needs at least 3 samples.
EnergyReport energy_bounds(const Hypergraph& h, const std::vector<double>& times,
                           const std::vector<std::vector<double>>& weight_traj, const std::vector<double>& energy_traj,
                           double epsilon);

struct ConvergenceReport {
  double delta = 0.0;
  std::vector<std::vector<double>> abs_kappa;        // [sample][edge]
  std::vector<std::optional<double>> edge_hit_time;  // first |kappa_e| <= delta
  std::optional<double> hit_time;                    // first max_e |kappa_e| <= delta
  double lipschitz = 0.0;                            // supplied or estimated L
  bool lipschitz_estimated = false;
  bool hypothesis_holds = false;  // |dkappa| >= L |dw| on every sampled pair, L > 0
  std::optional<double> bound;    // unset when L epsilon <= delta
  std::string note;
};

/// First-hit times by linear interpolation and the exponential hit-time bound
/// (1/(L eps - delta)) ln((2L + delta)/(delta (2 + eps))). Without a supplied L
/// the estimate is the smallest |dkappa|/|dw| over consecutive samples.
ConvergenceReport convergence_monitor(const std::vector<double>& times,
                                      const std::vector<std::vector<double>>& kappa_traj,
                                      const std::vector<std::vector<double>>& weight_traj, double delta, double epsilon,
                                      std::optional<double> lipschitz = std::nullopt);

struct WeightFlowTrace {
  std::vector<double> times;
  std::vector<std::vector<double>> weights;  // [sample][edge]
  std::vector<std::vector<double>> kappa;
  std::string stopped;  // why the run ended early, empty if it completed
};

/// Pure weight flow: recompute curvature from the current weights and take a
/// guarded Euler step, `steps` times. A step that would make a weight
/// nonpositive or non-finite ends the run; the trace keeps what was computed.
WeightFlowTrace run_weight_flow(const Hypergraph& h, const EdgeWeights& w0, CurvatureKind kind, double dt, int steps,
                                const CurvatureOptions& opt = {});

}  // namespace rfhnd
