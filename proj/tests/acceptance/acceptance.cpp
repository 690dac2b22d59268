// Acceptance run: one PASS/FAIL line per criterion.
//
// Exit status is 0 when every failing criterion is listed in --expect-fail;
// the listed ones still print FAIL with their measured numbers.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dense_oracle.hpp"
#include "rfhnd/curvature.hpp"
#include "rfhnd/diffusion.hpp"
#include "rfhnd/experiments.hpp"
#include "rfhnd/ricci_flow.hpp"
#include "rfhnd/synthgen.hpp"
#include "rfhnd/train.hpp"
#include "transport_oracle.hpp"

using namespace rfhnd;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double limit_seconds;
  std::function<Outcome()> run;
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

Hypergraph random_hypergraph(std::mt19937_64& rng, int n, int m, int max_size) {
  std::vector<std::vector<NodeId>> edges(m);
  std::vector<int> nodes(n);
  std::iota(nodes.begin(), nodes.end(), 0);
  std::vector<char> covered(n, 0);
  for (auto& e : edges) {
    const int size = std::uniform_int_distribution<int>(2, std::min(max_size, n))(rng);
    std::shuffle(nodes.begin(), nodes.end(), rng);
    for (int k = 0; k < size; ++k) {
      e.push_back(nodes[k]);
      covered[nodes[k]] = 1;
    }
  }
  for (int v = 0; v < n; ++v) {
    if (covered[v]) continue;
    for (;;) {
      auto& e = edges[std::uniform_int_distribution<int>(0, m - 1)(rng)];
      if (std::find(e.begin(), e.end(), v) == e.end()) {
        e.push_back(v);
        break;
      }
    }
  }
  return Hypergraph(n, std::move(edges));
}

Matrix gaussian(std::mt19937_64& rng, std::size_t r, std::size_t c) {
  std::normal_distribution<double> g;
  Matrix x(r, c);
  for (double& v : x.data()) v = g(rng);
  return x;
}

std::vector<double> uniform(std::mt19937_64& rng, std::size_t k, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(k);
  for (double& x : v) x = u(rng);
  return v;
}

int rand_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// 1. ---------------------------------------------------------------------
Outcome weight_range() {
  std::mt19937_64 rng(101);
  const double eps = 1e-3;
  std::size_t violations = 0, draws = 0;
  double lo = 1e300, hi = -1e300;
  for (int g = 0; g < 100; ++g) {
    Hypergraph h = random_hypergraph(rng, rand_int(rng, 5, 60), rand_int(rng, 2, 40), 8);
    for (int d = 0; d < 100; ++d, ++draws) {
      const FeatureMatrix x(gaussian(rng, h.num_nodes(), rand_int(rng, 1, 8)));
      const EdgeWeights weights = attribute_weight(h, x, {eps});
      for (double w : weights.values()) {
        lo = std::min(lo, w);
        hi = std::max(hi, w);
        if (w < eps || w > 2.0 + eps) ++violations;
      }
    }
  }
  return {violations == 0, std::to_string(draws) + " draws, " + std::to_string(violations) +
                               " violations, observed range [" + fmt(lo, 6) + ", " + fmt(hi, 6) + "]"};
}

// 2. ---------------------------------------------------------------------
Outcome energy_identity() {
  std::mt19937_64 rng(202);
  const double eps = 1e-3;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    Hypergraph h = random_hypergraph(rng, rand_int(rng, 5, 80), rand_int(rng, 2, 50), 10);
    const FeatureMatrix x(gaussian(rng, h.num_nodes(), rand_int(rng, 1, 8)));
    const double e = dirichlet_energy(h, x);
    const auto w = attribute_weight(h, x, {eps});
    const auto k = edge_energy_constants(h, eps);
    double identity = 0.0;
    for (std::size_t q = 0; q < w.size(); ++q) identity += k.c[q] - k.alpha[q] * w[q];
    worst = std::max(worst, std::abs(e - identity));
  }
  return {worst < 1e-8, "100 instances, max |E - sum(c - alpha w)| = " + fmt(worst, 3)};
}

// 3. ---------------------------------------------------------------------
Outcome certificate() {
  std::mt19937_64 rng(303);
  int inside = 0, floor_ok = 0, nonregular = 0, main_form = 0;
  std::string first_bad;
  for (int t = 0; t < 20; ++t) {
    Hypergraph h = random_hypergraph(rng, rand_int(rng, 10, 100), rand_int(rng, 5, 40), 8);
    DiffusionConfig cfg;
    cfg.tau = 0.02;
    cfg.steps = 30;
    cfg.force = true;
    const auto res = diffuse(h, FeatureMatrix(gaussian(rng, h.num_nodes(), 4)), cfg, analytic_provider(cfg));
    const auto& r = *res.energy_report;
    if (r.within()) ++inside;
    else if (first_bad.empty())
      first_bad = " first miss: mean " + fmt(r.mean_energy) + " vs [" + fmt(r.lower) + ", " + fmt(r.upper) + "]";
    main_form += r.form == BoundForm::MonotoneMain;
    if (!r.regular) {
      ++nonregular;
      floor_ok += r.lower > 0.0;
    }
  }
  return {inside == 20 && floor_ok == nonregular,
          std::to_string(inside) + "/20 inside [B2, B1] (" + std::to_string(main_form) + " main form), B2 > 0 on " +
              std::to_string(floor_ok) + "/" + std::to_string(nonregular) + " non-regular" + first_bad};
}

// 4. ---------------------------------------------------------------------
// Plain Euler steps X - tau F X at tau = bound and tau = 2 bound, no
// renormalisation, nonnegative fixed weights.
Outcome euler_stability() {
  std::mt19937_64 rng(404);
  int grew_at_bound = 0, grew_at_double = 0;
  double worst_ratio = 0.0;
  for (int t = 0; t < 100; ++t) {
    Hypergraph h = random_hypergraph(rng, rand_int(rng, 10, 60), rand_int(rng, 5, 40), 8);
    const AggregationWeights kw{uniform(rng, h.num_edges(), 0.0, 2.0), KprimeSource::Fixed};
    const FeatureMatrix x0(gaussian(rng, h.num_nodes(), 4));
    const double bound = stability_bound(max_row_sum(h, kw), 1.0).tau_bound;
    for (double factor : {1.0, 2.0}) {
      FeatureMatrix x = x0;
      bool grew = false;
      for (int s = 0; s < 10; ++s) {
        const double before = frobenius_norm(x.values());
        x = euler_step(x, node_update_direction(h, x, kw, true), factor * bound, false, s);
        const double after = frobenius_norm(x.values());
        if (after > before) {
          grew = true;
          if (factor == 1.0) worst_ratio = std::max(worst_ratio, after / before);
        }
      }
      (factor == 1.0 ? grew_at_bound : grew_at_double) += grew;
    }
  }
  return {grew_at_bound == 0 && grew_at_double > 0,
          "norm grew at tau = bound on " + std::to_string(grew_at_bound) + "/100 (worst step ratio " +
              fmt(worst_ratio, 8) + "), at 2x bound on " + std::to_string(grew_at_double) + "/100"};
}

// 5. ---------------------------------------------------------------------
Outcome orthogonality() {
  std::mt19937_64 rng(505);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    Hypergraph h = random_hypergraph(rng, rand_int(rng, 10, 80), rand_int(rng, 5, 50), 10);
    const FeatureMatrix x(gaussian(rng, h.num_nodes(), rand_int(rng, 2, 16)));
    const AggregationWeights kw{uniform(rng, h.num_edges(), -2.0, 2.0), KprimeSource::Fixed};
    const Matrix d = node_update_direction(h, x, kw, true);
    for (std::size_t i = 0; i < h.num_nodes(); ++i) worst = std::max(worst, std::abs(dot(x.row(i), d.row(i))));
  }
  // Component-constant features: one random unit vector per component.
  int nonzero = 0;
  for (int t = 0; t < 50; ++t) {
    Hypergraph h = random_hypergraph(rng, rand_int(rng, 10, 60), rand_int(rng, 3, 12), 4);
    const auto comp = connected_components(h);
    const int k = *std::max_element(comp.begin(), comp.end()) + 1;
    const Matrix dirs = normalize_rows(gaussian(rng, k, 5));
    Matrix x(h.num_nodes(), 5);
    for (std::size_t i = 0; i < h.num_nodes(); ++i)
      for (std::size_t q = 0; q < 5; ++q) x(i, q) = dirs(comp[i], q);
    const AggregationWeights kw{uniform(rng, h.num_edges(), -2.0, 2.0), KprimeSource::Fixed};
    for (bool cos : {true, false}) {
      const Matrix d = node_update_direction(h, FeatureMatrix::assume_normalized(x), kw, cos);
      for (double v : d.data()) nonzero += v != 0.0;
    }
  }
  return {worst < 1e-9 && nonzero == 0, "max |<x_i, dx_i>| = " + fmt(worst, 3) + " over 50 instances; " +
                                            std::to_string(nonzero) + " nonzero entries on constant components"};
}

// 6. ---------------------------------------------------------------------
Outcome loop_matrix() {
  std::mt19937_64 rng(606);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int n = rand_int(rng, 3, 50);
    Hypergraph h = random_hypergraph(rng, n, rand_int(rng, 1, 40), 8);
    const FeatureMatrix x(gaussian(rng, n, rand_int(rng, 1, 8)));
    const auto k = uniform(rng, h.num_edges(), -2.0, 2.0);
    const AggregationWeights kw{k, KprimeSource::Fixed};
    for (bool cos : {true, false}) {
      const Matrix loop = node_update_direction(h, x, kw, cos);
      const Matrix op = assemble_matrices(h, x, kw, cos).apply(x.values());
      std::vector<std::vector<int>> edges;
      for (const auto& e : h.edge_lists()) edges.emplace_back(e.begin(), e.end());
      const Matrix dense = oracle::matrix_form(n, edges, x.values(), k, cos);
      worst = std::max({worst, max_abs_diff(loop, op), max_abs_diff(loop, dense)});
    }
  }
  return {worst < 1e-9, "100 instances (n <= 50), max |loop - matrix| = " + fmt(worst, 3)};
}

// 7. ---------------------------------------------------------------------
// Masses are multiples of 1/64 so every flow and cost is exact in binary
// floating point; agreement is then tested with ==.
Outcome transport_exact() {
  std::mt19937_64 rng(707);
  Hypergraph h = random_hypergraph(rng, 40, 30, 5);
  HopMetric metric(h);
  const auto comp = connected_components(h);
  auto measure_on = [&](int k, int component) {
    std::vector<NodeId> pool;
    for (NodeId v = 0; v < 40; ++v)
      if (comp[v] == component) pool.push_back(v);
    std::shuffle(pool.begin(), pool.end(), rng);
    k = std::min<int>(k, pool.size());
    NodeMeasure m;
    m.support.assign(pool.begin(), pool.begin() + k);
    std::sort(m.support.begin(), m.support.end());
    std::vector<int> units(k, 1);
    for (int u = k; u < 64; ++u) ++units[rand_int(rng, 0, k - 1)];
    for (int u : units) m.mass.push_back(u / 64.0);
    return m;
  };
  auto oracle_cost = [&](const NodeMeasure& a, const NodeMeasure& b) {
    Matrix c(a.support.size(), b.support.size());
    for (std::size_t p = 0; p < a.support.size(); ++p)
      for (std::size_t q = 0; q < b.support.size(); ++q) c(p, q) = metric.distance(a.support[p], b.support[q]);
    return oracle::brute_force_transport(a.mass, b.mass, c);
  };
  const int main_comp = comp[0];
  int mismatches = 0;
  for (int t = 0; t < 500; ++t) {
    const int p = rand_int(rng, 1, 5);
    const int q = rand_int(rng, 1, 10 - p);
    const auto a = measure_on(p, main_comp), b = measure_on(q, main_comp);
    if (wasserstein1(a, b, metric) != oracle_cost(a, b)) ++mismatches;
  }
  int axiom_failures = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto a = measure_on(rand_int(rng, 1, 6), main_comp), b = measure_on(rand_int(rng, 1, 6), main_comp),
               c = measure_on(rand_int(rng, 1, 6), main_comp);
    const double ab = wasserstein1(a, b, metric), ba = wasserstein1(b, a, metric);
    const double ac = wasserstein1(a, c, metric), bc = wasserstein1(b, c, metric);
    bool ok = std::abs(ab - ba) <= 1e-9 && std::abs(wasserstein1(a, a, metric)) <= 1e-9 && ab >= -1e-9 &&
              ac <= ab + bc + 1e-9;
    const bool same = a.support == b.support && a.mass == b.mass;
    if (!same && ab <= 1e-9) ok = false;
    axiom_failures += !ok;
  }
  return {mismatches == 0 && axiom_failures == 0, "500 cases (support <= 10): " + std::to_string(mismatches) +
                                                      " mismatches; 1000 triples: " + std::to_string(axiom_failures) +
                                                      " axiom failures"};
}

// 8. ---------------------------------------------------------------------
Outcome forman_flow() {
  std::mt19937_64 rng(808);
  const double delta = 1e-2, dt = 0.01;
  const int steps = 2000;
  int converged = 0, settled = 0, bound_ok = 0, bound_checked = 0;
  std::ostringstream notes;
  for (int t = 0; t < 10; ++t) {
    Hypergraph h = random_hypergraph(rng, rand_int(rng, 5, 12), rand_int(rng, 3, 8), 4);
    const auto trace = run_weight_flow(h, EdgeWeights(uniform(rng, h.num_edges(), 0.5, 1.5)), CurvatureKind::Forman,
                                       dt, steps);
    std::vector<double> mx;
    for (const auto& k : trace.kappa) {
      double v = 0.0;
      for (double x : k) v = std::max(v, std::abs(x));
      mx.push_back(v);
    }
    const bool hit = std::any_of(mx.begin(), mx.end(), [&](double v) { return v < delta; });
    converged += hit;
    const std::size_t transient = mx.size() / 10;
    bool mono = true;
    for (std::size_t s = transient + 1; s < mx.size(); ++s) mono = mono && mx[s] <= mx[s - 1] + 1e-12;
    settled += mono;
    const auto rep = convergence_monitor(trace.times, trace.kappa, trace.weights, delta, 1e-3);
    if (rep.hypothesis_holds && rep.bound) {
      ++bound_checked;
      bound_ok += rep.hit_time && *rep.hit_time <= *rep.bound;
    }
    if (t < 3) {
      notes << " [#" << t << ": max|k| " << fmt(mx.front()) << " -> " << fmt(mx.back()) << " over "
            << mx.size() - 1 << " steps" << (trace.stopped.empty() ? "" : ", stopped early") << "]";
    }
  }
  return {converged == 10 && settled == 10 && bound_ok == bound_checked,
          std::to_string(converged) + "/10 reach max|kappa| < 1e-2, " + std::to_string(settled) +
              "/10 non-increasing after transient, bound held on " + std::to_string(bound_ok) + "/" +
              std::to_string(bound_checked) + " where hypothesis holds;" + notes.str()};
}

// 9. ---------------------------------------------------------------------
Outcome gradient_fidelity() {
  SbmConfig sc;
  sc.nodes_per_class = 500;
  sc.edges = 200;
  sc.alpha = 3;
  sc.seed = 9;
  const Dataset d = generate_sbm(sc);
  ModelConfig m;
  TrainConfig tc;
  const Split split = make_split(*d.labels, tc);
  const ModelParams p = init_params(m, sc.feature_dim, 2, d.graph.num_edges(), 9);
  const auto r = gradient_check(d.graph, *d.features, *d.labels, split.train, p, m, 64, 909);
  return {r.probes == 64 && r.max_rel_error < 1e-4, "64 probes, max rel error " + fmt(r.max_rel_error, 3) + " (" +
                                                        std::to_string(r.resampled) + " kink probes redrawn)"};
}

SbmConfig desk_sbm() {
  SbmConfig c;
  c.nodes_per_class = 500;
  c.edges = 200;
  c.edge_size = 15;
  return c;
}

std::map<std::pair<std::string, std::size_t>, double> mean_acc(const std::vector<AccuracyRow>& rows) {
  std::map<std::pair<std::string, std::size_t>, std::vector<double>> acc;
  for (const auto& r : rows) acc[{r.variant, r.alpha}].push_back(100.0 * r.result.test_acc);
  std::map<std::pair<std::string, std::size_t>, double> out;
  for (const auto& [k, v] : acc) out[k] = mean(v);
  return out;
}

// 10. --------------------------------------------------------------------
Outcome heterophily_gap(const SuiteContext& ctx) {
  AccuracyGridSpec g;
  g.sbm = desk_sbm();
  g.alphas = {1, 7};
  g.variants = default_variants(ModelConfig{});
  const auto m = mean_acc(run_accuracy_grid(g, ctx, "heterophily_gap.csv"));
  const double r1 = m.at({"rfhnd", 1}), b1 = m.at({"baseline", 1});
  const double r7 = m.at({"rfhnd", 7}), b7 = m.at({"baseline", 7});
  return {r7 - b7 >= 5.0 && std::abs(r1 - b1) <= 3.0,
          "alpha=7: rfhnd " + fmt(r7) + " vs baseline " + fmt(b7) + " (gap " + fmt(r7 - b7) + "); alpha=1: " +
              fmt(r1) + " vs " + fmt(b1) + " (diff " + fmt(r1 - b1) + ")"};
}

// 11. --------------------------------------------------------------------
Outcome oversmoothing(const SuiteContext& ctx) {
  OversmoothSpec s;
  s.sbm = desk_sbm();
  s.sbm.alpha = 2;
  s.depths = {2, 40};
  const auto rows = run_oversmooth_suite(s, ctx);
  std::map<std::pair<std::string, int>, OversmoothRow> at;
  for (const auto& r : rows) at[{r.variant, r.depth}] = r;
  const auto& b2 = at.at({"baseline", 2});
  const auto& b40 = at.at({"baseline", 40});
  const auto& r2 = at.at({"rfhnd", 2});
  const auto& r40 = at.at({"rfhnd", 40});
  const double base_ratio = b40.energy / b2.energy, rf_ratio = r40.energy / r2.energy;
  const double acc_drop = 100.0 * std::abs(r40.accuracy - r2.accuracy);
  return {base_ratio < 0.01 && rf_ratio >= 0.25 && acc_drop <= 5.0,
          "baseline energy kept " + fmt(100 * base_ratio, 3) + "%, rfhnd kept " + fmt(100 * rf_ratio, 3) +
              "%, rfhnd accuracy " + fmt(100 * r2.accuracy) + " -> " + fmt(100 * r40.accuracy)};
}

// 12. --------------------------------------------------------------------
Outcome ablation_direction(const SuiteContext& ctx) {
  AccuracyGridSpec g;
  g.sbm = desk_sbm();
  g.alphas = {5};
  g.variants = ablation_variants(ModelConfig{});
  const auto m = mean_acc(run_accuracy_grid(g, ctx, "ablation.csv"));
  const double full = m.at({"full", 5}), nc = m.at({"no-cos", 5}), nh = m.at({"no-hypernet", 5}),
               nb = m.at({"no-both", 5});
  const bool ok = full >= nc && full >= nh && full >= nb && nb <= std::min(nc, nh) + 1.0;
  return {ok, "full " + fmt(full) + ", no-cos " + fmt(nc) + ", no-hypernet " + fmt(nh) + ", no-both " + fmt(nb)};
}

// 13. --------------------------------------------------------------------
Outcome complexity(const SuiteContext& ctx) {
  ComplexitySpec s;
  const auto r = run_complexity_probe(s, ctx);
  return {r.slope_m >= 0.8 && r.slope_m <= 1.3,
          "slope vs m " + fmt(r.slope_m, 3) + " (edge size 15), slope vs d " + fmt(r.slope_d, 3)};
}

std::set<int> parse_ids(const std::string& s) {
  std::set<int> out;
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ','))
    if (!tok.empty()) out.insert(std::stoi(tok));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string out_dir = "acceptance_runs", only, expect_fail;
  bool resume = false;
  app.add_option("--out-dir", out_dir, "where suite CSVs and cached runs go");
  app.add_option("--only", only, "comma-separated criterion ids to run");
  app.add_option("--expect-fail", expect_fail, "comma-separated ids known not to hold; they still print FAIL");
  app.add_flag("--resume", resume, "reuse cached training runs (timings then reflect the cache)");
  CLI11_PARSE(app, argc, argv);

  SuiteContext ctx;
  ctx.out_dir = out_dir;
  ctx.resume = resume;
  std::filesystem::create_directories(ctx.out_dir);

  const std::vector<Criterion> criteria{
      {1, "weight range", 10, weight_range},
      {2, "energy-weight identity", 5, energy_identity},
      {3, "energy certificate", 60, certificate},
      {4, "Euler stability", 30, euler_stability},
      {5, "orthogonality and fixed point", 5, orthogonality},
      {6, "loop/matrix equivalence", 5, loop_matrix},
      {7, "transport exactness", 60, transport_exact},
      {8, "Forman flow convergence", 60, forman_flow},
      {9, "gradient fidelity", 60, gradient_fidelity},
      {10, "heterophily gap", 15 * 60, [&] { return heterophily_gap(ctx); }},
      {11, "over-smoothing", 20 * 60, [&] { return oversmoothing(ctx); }},
      {12, "ablation direction", 20 * 60, [&] { return ablation_direction(ctx); }},
      {13, "complexity scaling", 5 * 60, [&] { return complexity(ctx); }},
  };
  const auto selected = parse_ids(only);
  const auto expected = parse_ids(expect_fail);

  int unexpected = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = sec < c.limit_seconds;
    const bool pass = o.ok && in_time;
    std::printf("%s [%d] %s: %s (%.1f s, limit %.0f s%s)%s\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                o.detail.c_str(), sec, c.limit_seconds, in_time ? "" : ", over time",
                !pass && expected.count(c.id) ? " [known]" : "");
    std::fflush(stdout);
    if (!pass && !expected.count(c.id)) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
