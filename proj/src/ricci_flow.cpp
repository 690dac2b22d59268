#include "rfhnd/ricci_flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "rfhnd/kernels.hpp"

namespace rfhnd {

namespace {

// Structure-only analogue of edge_cosine_mass with every cosine equal to 1,
// summed in the same order so identical features give a ratio of exactly 1.
std::vector<double> edge_degree_mass(const Hypergraph& h, bool with_diagonal) {
  const auto& isd = h.inv_sqrt_degree();
  std::vector<double> out(h.num_edges());
  for (std::size_t e = 0; e < h.num_edges(); ++e) {
    auto members = h.edge(static_cast<EdgeId>(e));
    double off = 0.0, diag = 0.0;
    for (std::size_t p = 0; p < members.size(); ++p) {
      const NodeId i = members[p];
      diag += isd[i] * isd[i];
      for (std::size_t q = p + 1; q < members.size(); ++q) off += 1.0 * isd[i] * isd[members[q]];
    }
    out[e] = 2.0 * off + (with_diagonal ? diag : 0.0);
  }
  return out;
}

}  // namespace

EdgeWeights attribute_weight(const Hypergraph& h, const FeatureMatrix& x, const WeightRuleConfig& cfg) {
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("attribute_weight: epsilon must be positive");
  if (x.rows() != h.num_nodes()) throw std::invalid_argument("attribute_weight: feature rows do not match nodes");
  const bool diag = cfg.pairs == PairConvention::OrderedWithDiagonal;
  const auto cos_mass = omp::edge_cosine_mass(h, x.values(), diag);
  const auto deg_mass = edge_degree_mass(h, diag);
  std::vector<double> w(h.num_edges());
  for (std::size_t e = 0; e < w.size(); ++e) {
    // cos <= 1 termwise; the clamp only absorbs rounding
    const double ratio = std::clamp(cos_mass[e] / deg_mass[e], -1.0, 1.0);
    w[e] = ratio + 1.0 + cfg.epsilon;
  }
  return EdgeWeights(std::move(w));
}

EdgeWeights weight_flow_step(const EdgeWeights& w, const CurvatureVector& kappa, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("weight_flow_step: dt must be positive");
  if (kappa.kappa.size() != w.size()) throw std::invalid_argument("weight_flow_step: size mismatch");
  std::vector<double> out(w.size());
  for (std::size_t e = 0; e < w.size(); ++e) {
    out[e] = w[e] - dt * kappa.kappa[e] * w[e];
    if (!(out[e] > 0.0) || !std::isfinite(out[e])) {
      double admissible = std::numeric_limits<double>::infinity();
      for (std::size_t f = 0; f < w.size(); ++f)
        if (kappa.kappa[f] > 0.0) admissible = std::min(admissible, 1.0 / kappa.kappa[f]);
      std::ostringstream os;
      os << "weight flow step would make edge " << e << " nonpositive (kappa " << kappa.kappa[e] << ", dt " << dt
         << "); largest admissible dt is below " << admissible;
      throw std::domain_error(os.str());
    }
  }
  return EdgeWeights(std::move(out));
}

double dirichlet_energy(const Hypergraph& h, const Matrix& x) {
  double total = 0.0;
  for (double v : omp::dirichlet_energy_terms(h, x)) total += v;
  return total;
}

EdgeEnergyConstants edge_energy_constants(const Hypergraph& h, double epsilon) {
  const auto& isd = h.inv_sqrt_degree();
  EdgeEnergyConstants k;
  const std::size_t m = h.num_edges();
  k.alpha.resize(m);
  k.spread.resize(m);
  k.c.resize(m);
  for (std::size_t e = 0; e < m; ++e) {
    auto members = h.edge(static_cast<EdgeId>(e));
    double s = 0.0, inv = 0.0;
    for (NodeId i : members) {
      s += isd[i];
      inv += isd[i] * isd[i];
    }
    k.alpha[e] = s * s / static_cast<double>(members.size());
    k.spread[e] = inv;
    k.c[e] = inv + (1.0 + epsilon) * k.alpha[e];
  }
  return k;
}

MonotoneSegments monotone_segments(const std::vector<double>& times, const std::vector<double>& values,
                                   double dead_band) {
  if (times.size() != values.size() || times.size() < 2) {
    throw std::invalid_argument("monotone_segments: need matching traces with at least 2 samples");
  }
  MonotoneSegments seg;
  int last = 0;
  for (std::size_t k = 0; k + 1 < values.size(); ++k) {
    const double d = values[k + 1] - values[k];
    const int s = d > dead_band ? 1 : (d < -dead_band ? -1 : 0);
    if (s == 0) continue;
    if (last != 0 && s != last) seg.extrema_times.push_back(times[k]);
    last = s;
  }
  const double t0 = times.front(), t1 = times.back();
  const auto& x = seg.extrema_times;
  seg.monotone = x.empty();
  if (x.empty()) {
    seg.shortest = t1 - t0;
  } else if (x.size() == 1) {
    seg.shortest = std::min(x[0] - t0, t1 - x[0]);
  } else {
    seg.shortest = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < x.size(); ++k) seg.shortest = std::min(seg.shortest, x[k] - x[k - 1]);
  }
  return seg;
}

double trapezoid_mean(const std::vector<double>& times, const std::vector<double>& values) {
  if (times.size() != values.size() || times.size() < 2) {
    throw std::invalid_argument("trapezoid_mean: need matching traces with at least 2 samples");
  }
  double area = 0.0;
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    area += 0.5 * (values[k] + values[k + 1]) * (times[k + 1] - times[k]);
  }
  return area / (times.back() - times.front());
}

std::string_view to_string(BoundForm f) { return f == BoundForm::MonotoneMain ? "monotone-main" : "general"; }

EnergyReport energy_bounds(const Hypergraph& h, const std::vector<double>& times,
                           const std::vector<std::vector<double>>& weight_traj, const std::vector<double>& energy_traj,
                           double epsilon) {
  const std::size_t n = times.size();
  if (n < 3) throw std::invalid_argument("energy_bounds: window too short (need at least 3 samples)");
  if (weight_traj.size() != n || energy_traj.size() != n) {
    throw std::invalid_argument("energy_bounds: trajectories do not share the time grid");
  }
  const double step = times[1] - times[0];
  for (std::size_t k = 1; k < n; ++k) {
    if (std::abs((times[k] - times[k - 1]) - step) > 1e-9 * std::max(1.0, std::abs(step))) {
      throw std::invalid_argument("energy_bounds: time grid is not uniform");
    }
  }
  const std::size_t m = h.num_edges();
  for (const auto& w : weight_traj) {
    if (w.size() != m) throw std::invalid_argument("energy_bounds: weight sample has wrong length");
  }

  EnergyReport r;
  r.times = times;
  r.energy = energy_traj;
  r.mean_energy = trapezoid_mean(times, energy_traj);
  r.regular = is_regular(h);
  const auto k = edge_energy_constants(h, epsilon);
  r.c = k.c;
  r.alpha = k.alpha;
  r.rho.resize(m);
  r.zeta.resize(m);

  const double window = times.back() - times.front();
  bool all_monotone = true;
  std::vector<double> trace(n);
  for (std::size_t e = 0; e < m; ++e) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      trace[s] = weight_traj[s][e];
      lo = std::min(lo, trace[s]);
      hi = std::max(hi, trace[s]);
    }
    r.rho[e] = hi / lo;
    const auto seg = monotone_segments(times, trace);
    r.zeta[e] = seg.shortest > 0.0 ? seg.shortest : step;
    all_monotone = all_monotone && seg.monotone;
  }

  double sum_spread = 0.0, sum_alpha = 0.0, rho_max = 1.0, gu = 0.0, gl = 0.0, ga = 0.0;
  for (std::size_t e = 0; e < m; ++e) {
    sum_spread += k.spread[e];
    sum_alpha += k.alpha[e];
    rho_max = std::max(rho_max, r.rho[e]);
    gu += k.c[e] * r.rho[e] / r.zeta[e];
    ga += k.alpha[e] * epsilon * r.rho[e];
    gl += k.c[e] - (2.0 + epsilon) * k.alpha[e] * window / r.zeta[e];
  }
  r.main_upper = rho_max * (sum_spread + sum_alpha);
  r.main_lower = sum_spread - sum_alpha;
  r.general_upper = window * gu - ga;
  r.general_lower = gl;
  r.form = all_monotone ? BoundForm::MonotoneMain : BoundForm::General;
  r.upper = all_monotone ? r.main_upper : r.general_upper;
  r.lower = all_monotone ? r.main_lower : r.general_lower;
  return r;
}

namespace {

std::optional<double> first_hit(const std::vector<double>& times, const std::vector<double>& trace, double delta) {
  for (std::size_t k = 0; k < trace.size(); ++k) {
    if (trace[k] <= delta) {
      if (k == 0) return times[0];
      const double a = trace[k - 1], b = trace[k];
      return times[k - 1] + (a - delta) / (a - b) * (times[k] - times[k - 1]);
    }
  }
  return std::nullopt;
}

}  // namespace

ConvergenceReport convergence_monitor(const std::vector<double>& times,
                                      const std::vector<std::vector<double>>& kappa_traj,
                                      const std::vector<std::vector<double>>& weight_traj, double delta, double epsilon,
                                      std::optional<double> lipschitz) {
  if (!(delta > 0.0)) throw std::invalid_argument("convergence_monitor: delta must be positive");
  if (kappa_traj.size() != times.size() || times.empty()) {
    throw std::invalid_argument("convergence_monitor: trajectory does not match the time grid");
  }
  ConvergenceReport r;
  r.delta = delta;
  const std::size_t n = times.size(), m = kappa_traj[0].size();
  r.abs_kappa.resize(n);
  std::vector<double> max_trace(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    r.abs_kappa[s].resize(m);
    for (std::size_t e = 0; e < m; ++e) {
      r.abs_kappa[s][e] = std::abs(kappa_traj[s][e]);
      max_trace[s] = std::max(max_trace[s], r.abs_kappa[s][e]);
    }
  }
  std::vector<double> trace(n);
  r.edge_hit_time.resize(m);
  for (std::size_t e = 0; e < m; ++e) {
    for (std::size_t s = 0; s < n; ++s) trace[s] = r.abs_kappa[s][e];
    r.edge_hit_time[e] = first_hit(times, trace, delta);
  }
  r.hit_time = first_hit(times, max_trace, delta);

  const bool have_w = weight_traj.size() == n;
  double est = std::numeric_limits<double>::infinity();
  if (have_w) {
    for (std::size_t s = 0; s + 1 < n; ++s) {
      for (std::size_t e = 0; e < m; ++e) {
        const double dw = std::abs(weight_traj[s + 1][e] - weight_traj[s][e]);
        if (dw <= 1e-14) continue;
        est = std::min(est, std::abs(kappa_traj[s + 1][e] - kappa_traj[s][e]) / dw);
      }
    }
  }
  if (lipschitz) {
    r.lipschitz = *lipschitz;
  } else {
    r.lipschitz = std::isfinite(est) ? est : 0.0;
    r.lipschitz_estimated = true;
  }
  r.hypothesis_holds = have_w && r.lipschitz > 0.0 && r.lipschitz <= est * (1.0 + 1e-12);

  const double L = r.lipschitz;
  if (L * epsilon > delta) {
    r.bound = 1.0 / (L * epsilon - delta) * std::log((2.0 * L + delta) / (delta * (2.0 + epsilon)));
  } else {
    std::ostringstream os;
    os << "bound inapplicable: L*eps = " << L * epsilon << " <= delta = " << delta;
    r.note = os.str();
  }
  if (!have_w) r.note += r.note.empty() ? "no weight trajectory" : "; no weight trajectory";
  return r;
}

WeightFlowTrace run_weight_flow(const Hypergraph& h, const EdgeWeights& w0, CurvatureKind kind, double dt, int steps,
                                const CurvatureOptions& opt) {
  WeightFlowTrace tr;
  EdgeWeights w = w0;
  for (int s = 0; s <= steps; ++s) {
    auto kappa = curvature(h, w, kind, opt);
    tr.times.push_back(s * dt);
    tr.weights.emplace_back(w.values().begin(), w.values().end());
    tr.kappa.push_back(kappa.kappa);
    if (s == steps) break;
    try {
      w = weight_flow_step(w, kappa, dt);
    } catch (const std::domain_error& err) {
      tr.stopped = err.what();
      break;
    }
  }
  return tr;
}

}  // namespace rfhnd
