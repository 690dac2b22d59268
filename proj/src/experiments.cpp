#include "rfhnd/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "rfhnd/ricci_flow.hpp"

#ifndef RFHND_GIT_HASH
#define RFHND_GIT_HASH "unknown"
#endif

namespace rfhnd {

using nlohmann::json;

const char* build_git_hash() { return RFHND_GIT_HASH; }

namespace {

json j_sbm(const SbmConfig& c) {
  return {{"nodes_per_class", c.nodes_per_class}, {"classes", c.classes},   {"edges", c.edges},
          {"edge_size", c.edge_size},             {"alpha", c.alpha},       {"feature_std", c.feature_std},
          {"feature_dim", c.feature_dim},         {"mean_offset", c.mean_offset}, {"seed", c.seed}};
}

json j_model(const ModelConfig& c) {
  return {{"arch", std::string(to_string(c.arch))}, {"hidden", c.hidden},
          {"tau", c.tau},                           {"steps", c.steps},
          {"use_cosine", c.use_cosine},             {"hypernet", c.hypernet},
          {"scatter", std::string(to_string(c.scatter))}};
}

json j_train(const TrainConfig& c) {
  return {{"lr", c.lr},           {"weight_decay", c.weight_decay}, {"dropout", c.dropout},
          {"epochs", c.epochs},   {"seed", c.seed},                 {"train_frac", c.train_frac},
          {"val_frac", c.val_frac}, {"test_frac", c.test_frac}};
}

json j_variants(const std::vector<Variant>& vs) {
  json out = json::array();
  for (const auto& v : vs) out.push_back({{"name", v.name}, {"model", j_model(v.model)}});
  return out;
}

std::string fmt(double v) { return std::isnan(v) ? "nan" : format_double(v); }

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
  return h;
}

void say(const SuiteContext& ctx, const std::string& msg) {
  if (ctx.log) ctx.log(msg);
}

// Cached trial: key is the full description of the run.
TrialResult cached_trial(const SuiteContext& ctx, const std::string& suite, const json& key,
                         const std::function<TrialResult()>& run) {
  const std::string text = key.dump();
  std::ostringstream name;
  name << suite << '-' << std::hex << fnv1a(text) << ".json";
  const auto dir = ctx.out_dir / "runs";
  const auto path = dir / name.str();
  if (ctx.resume && std::filesystem::exists(path)) {
    std::ifstream in(path);
    json j = json::parse(in, nullptr, false);
    if (!j.is_discarded() && j.value("key", json()) == key) {
      const auto& r = j.at("result");
      TrialResult t;
      t.test_acc = r.at("test_acc").get<double>();
      t.val_acc = r.at("val_acc").get<double>();
      t.best_epoch = r.at("best_epoch").get<int>();
      t.energy_initial = r.at("energy_initial").get<double>();
      t.energy_terminal = r.at("energy_terminal").get<double>();
      t.seconds = r.at("seconds").get<double>();
      return t;
    }
  }
  TrialResult t = run();
  std::filesystem::create_directories(dir);
  json out{{"key", key},
           {"result",
            {{"test_acc", t.test_acc},
             {"val_acc", t.val_acc},
             {"best_epoch", t.best_epoch},
             {"energy_initial", t.energy_initial},
             {"energy_terminal", t.energy_terminal},
             {"seconds", t.seconds}}}};
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream o(tmp);
    o << out.dump(1) << "\n";
  }
  std::filesystem::rename(tmp, path);
  return t;
}

Dataset sbm_for(SbmConfig c, std::size_t alpha, std::uint64_t seed) {
  c.alpha = alpha;
  c.seed = seed;
  return generate_sbm(c);
}

}  // namespace

std::string to_json(const SbmConfig& c) { return j_sbm(c).dump(); }
std::string to_json(const ModelConfig& c) { return j_model(c).dump(); }
std::string to_json(const TrainConfig& c) { return j_train(c).dump(); }

TrialResult run_trial(const Dataset& d, const ModelConfig& mcfg, const TrainConfig& tcfg) {
  if (!d.features || !d.labels) throw std::invalid_argument("training needs features and labels");
  const auto start = std::chrono::steady_clock::now();
  const Split split = make_split(*d.labels, tcfg);
  const TrainResult tr = train(d.graph, *d.features, *d.labels, split, mcfg, tcfg);

  Tape t;
  Tape::Var x = t.leaf(*d.features);
  BoundParams bp = bind(t, tr.params, false);
  ModelConfig zero = mcfg;
  zero.steps = 0;
  const Tape::Var x0 = model_forward(t, d.graph, x, bp, tr.params, zero).features;
  const Tape::Var xt = model_forward(t, d.graph, x, bp, tr.params, mcfg).features;

  TrialResult r;
  r.test_acc = tr.test_acc;
  r.val_acc = tr.best_val_acc;
  r.best_epoch = tr.best_epoch;
  r.energy_initial = dirichlet_energy(d.graph, t.value(x0));
  r.energy_terminal = dirichlet_energy(d.graph, t.value(xt));
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<Variant> default_variants(const ModelConfig& rfhnd) {
  ModelConfig base = rfhnd;
  base.arch = Architecture::MeanBaseline;
  ModelConfig full = rfhnd;
  full.arch = Architecture::Rfhnd;
  return {{"rfhnd", full}, {"baseline", base}};
}

std::vector<Variant> ablation_variants(const ModelConfig& rfhnd) {
  std::vector<Variant> out;
  for (const char* name : {"none", "no-cos", "no-hypernet", "no-both"}) {
    ModelConfig c = rfhnd;
    c.arch = Architecture::Rfhnd;
    apply_ablation(c, name);
    out.push_back({std::string(name) == "none" ? "full" : name, c});
  }
  return out;
}

void write_csv_with_sidecar(const std::filesystem::path& csv, const std::vector<std::string>& header,
                            const std::vector<std::vector<std::string>>& rows, const std::string& config_json,
                            std::uint64_t seed) {
  if (csv.has_parent_path()) std::filesystem::create_directories(csv.parent_path());
  {
    std::ofstream out(csv, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + csv.string());
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t k = 0; k < cells.size(); ++k) out << (k ? "," : "") << cells[k];
      out << "\n";
    };
    line(header);
    for (const auto& r : rows) line(r);
  }
  json meta{{"git_hash", build_git_hash()},
            {"seed", seed},
            {"config", json::parse(config_json)},
            {"columns", header},
            {"rows", rows.size()}};
  std::ofstream side(csv.string() + ".meta.json", std::ios::binary);
  if (!side) throw std::runtime_error("cannot write sidecar for " + csv.string());
  side << meta.dump(2) << "\n";
}

std::vector<AccuracyRow> run_accuracy_grid(const AccuracyGridSpec& spec, const SuiteContext& ctx,
                                           const std::string& csv_name) {
  if (spec.variants.empty()) throw std::invalid_argument("accuracy grid needs at least one variant");
  std::vector<AccuracyRow> rows;
  for (std::size_t alpha : spec.alphas) {
    for (std::uint64_t seed : spec.seeds) {
      const Dataset d = sbm_for(spec.sbm, alpha, seed);
      TrainConfig tc = spec.train;
      tc.seed = seed;
      for (const auto& v : spec.variants) {
        SbmConfig sc = spec.sbm;
        sc.alpha = alpha;
        sc.seed = seed;
        const json key{{"sbm", j_sbm(sc)}, {"model", j_model(v.model)}, {"train", j_train(tc)}};
        try {
          TrialResult r = cached_trial(ctx, "trial", key, [&] { return run_trial(d, v.model, tc); });
          say(ctx, v.name + " alpha=" + std::to_string(alpha) + " seed=" + std::to_string(seed) +
                       " acc=" + format_double(r.test_acc));
          rows.push_back({v.name, alpha, seed, r});
        } catch (const std::exception& e) {
          throw std::runtime_error("accuracy grid run " + v.name + " alpha=" + std::to_string(alpha) +
                                   " seed=" + std::to_string(seed) + " failed: " + e.what());
        }
      }
    }
  }
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    cells.push_back({r.variant, std::to_string(r.alpha), std::to_string(r.seed), fmt(r.result.test_acc),
                     fmt(r.result.val_acc), fmt(r.result.energy_terminal)});
  }
  const json cfg{{"suite", "accuracy"}, {"sbm", j_sbm(spec.sbm)}, {"alphas", spec.alphas}, {"seeds", spec.seeds},
                 {"variants", j_variants(spec.variants)}, {"train", j_train(spec.train)}};
  write_csv_with_sidecar(ctx.out_dir / csv_name, {"variant", "alpha", "seed", "test_acc", "val_acc", "energy"}, cells,
                         cfg.dump(), spec.seeds.empty() ? 0 : spec.seeds.front());
  return rows;
}

std::vector<OversmoothRow> run_oversmooth_suite(const OversmoothSpec& spec, const SuiteContext& ctx) {
  std::vector<OversmoothRow> rows;
  for (std::uint64_t seed : spec.seeds) {
    SbmConfig sc = spec.sbm;
    sc.seed = seed;
    const Dataset d = generate_sbm(sc);
    rows.push_back({"features", 0, seed, std::numeric_limits<double>::quiet_NaN(),
                    dirichlet_energy(d.graph, normalize_rows(*d.features))});
    TrainConfig tc = spec.train;
    tc.seed = seed;
    for (int depth : spec.depths) {
      ModelConfig m = spec.model;
      m.steps = depth;
      for (const auto& v : default_variants(m)) {
        const json key{{"sbm", j_sbm(sc)}, {"model", j_model(v.model)}, {"train", j_train(tc)}};
        try {
          TrialResult r = cached_trial(ctx, "trial", key, [&] { return run_trial(d, v.model, tc); });
          say(ctx, v.name + " depth=" + std::to_string(depth) + " seed=" + std::to_string(seed) +
                       " acc=" + format_double(r.test_acc) + " energy=" + format_double(r.energy_terminal));
          rows.push_back({v.name, depth, seed, r.test_acc, r.energy_terminal});
        } catch (const std::exception& e) {
          throw std::runtime_error("oversmooth run " + v.name + " depth=" + std::to_string(depth) +
                                   " seed=" + std::to_string(seed) + " failed: " + e.what());
        }
      }
    }
  }
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows)
    cells.push_back({r.variant, std::to_string(r.depth), std::to_string(r.seed), fmt(r.accuracy), fmt(r.energy)});
  const json cfg{{"suite", "oversmooth"}, {"sbm", j_sbm(spec.sbm)}, {"depths", spec.depths}, {"seeds", spec.seeds},
                 {"model", j_model(spec.model)}, {"train", j_train(spec.train)}};
  write_csv_with_sidecar(ctx.out_dir / "oversmooth.csv", {"variant", "depth", "seed", "accuracy", "dirichlet_energy"},
                         cells, cfg.dump(), spec.seeds.empty() ? 0 : spec.seeds.front());
  return rows;
}

std::vector<RobustnessRow> run_robustness_suite(const RobustnessSpec& spec, const SuiteContext& ctx) {
  std::vector<RobustnessRow> rows;
  for (std::uint64_t seed : spec.seeds) {
    SbmConfig sc = spec.sbm;
    sc.seed = seed;
    const Dataset clean = generate_sbm(sc);
    TrainConfig tc = spec.train;
    tc.seed = seed;
    for (NoiseKind kind : spec.kinds) {
      for (double rate : spec.rates) {
        NoiseConfig nc;
        nc.kind = kind;
        nc.rate = rate;
        nc.seed = seed ^ 0x9e3779b97f4a7c15ULL;
        const Dataset d = apply_noise(clean, nc);
        for (const auto& v : default_variants(spec.model)) {
          // rate 0 is the clean run whatever the kind, so it shares the cache entry
          const json key{{"sbm", j_sbm(sc)},
                         {"noise", rate == 0.0 ? json() : json{{"kind", std::string(to_string(kind))}, {"rate", rate}}},
                         {"model", j_model(v.model)},
                         {"train", j_train(tc)}};
          try {
            TrialResult r = cached_trial(ctx, "trial", key, [&] { return run_trial(d, v.model, tc); });
            say(ctx, v.name + " " + std::string(to_string(kind)) + " rate=" + format_double(rate) +
                         " seed=" + std::to_string(seed) + " acc=" + format_double(r.test_acc));
            rows.push_back({v.name, kind, rate, seed, r.test_acc});
          } catch (const std::exception& e) {
            throw std::runtime_error("robustness run " + v.name + " " + std::string(to_string(kind)) +
                                     " rate=" + format_double(rate) + " seed=" + std::to_string(seed) +
                                     " failed: " + e.what());
          }
        }
      }
    }
  }
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows)
    cells.push_back({r.variant, std::string(to_string(r.kind)), fmt(r.rate), std::to_string(r.seed), fmt(r.accuracy)});
  json kinds = json::array();
  for (NoiseKind k : spec.kinds) kinds.push_back(std::string(to_string(k)));
  const json cfg{{"suite", "robustness"}, {"sbm", j_sbm(spec.sbm)}, {"kinds", kinds},
                 {"rates", spec.rates},   {"seeds", spec.seeds},    {"model", j_model(spec.model)},
                 {"train", j_train(spec.train)}};
  const std::uint64_t first = spec.seeds.empty() ? 0 : spec.seeds.front();
  write_csv_with_sidecar(ctx.out_dir / "robustness.csv", {"variant", "noise_kind", "rate", "seed", "accuracy"}, cells,
                         cfg.dump(), first);
  std::vector<std::vector<std::string>> summary;
  for (const auto& s : summarize(rows)) {
    summary.push_back({s.variant, std::string(to_string(s.kind)), fmt(s.rate), fmt(s.mean), fmt(s.stddev),
                       std::to_string(s.count)});
  }
  write_csv_with_sidecar(ctx.out_dir / "robustness_summary.csv",
                         {"variant", "noise_kind", "rate", "accuracy_mean", "accuracy_std", "seeds"}, summary,
                         cfg.dump(), first);
  return rows;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::vector<RobustnessSummary> summarize(const std::vector<RobustnessRow>& rows) {
  std::vector<RobustnessSummary> out;
  std::map<std::tuple<std::string, int, double>, std::vector<double>> groups;
  std::vector<std::tuple<std::string, int, double>> order;
  for (const auto& r : rows) {
    auto key = std::make_tuple(r.variant, static_cast<int>(r.kind), r.rate);
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(r.accuracy);
  }
  for (const auto& key : order) {
    const auto& v = groups[key];
    out.push_back({std::get<0>(key), static_cast<NoiseKind>(std::get<1>(key)), std::get<2>(key), mean(v),
                   sample_stddev(v), v.size()});
  }
  return out;
}

double time_learned_step(const Hypergraph& h, const Matrix& x, const ModelParams& p, const ModelConfig& cfg,
                         int repeats) {
  std::vector<double> times;
  for (int r = 0; r < std::max(repeats, 1); ++r) {
    const auto start = std::chrono::steady_clock::now();
    Tape t;
    Tape::Var xv = t.leaf(x);
    BoundParams bp = bind(t, p, false);
    Tape::Var k = learned_kprime(t, h, xv, bp.node_mlp, bp.edge_mlp, cfg.scatter);
    Tape::Var y = t.row_normalize(t.diffusion_step(h, xv, k, cfg.tau, cfg.use_cosine));
    volatile double sink = t.value(y)(0, 0);
    (void)sink;
    times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  std::nth_element(times.begin(), times.begin() + static_cast<std::ptrdiff_t>(times.size() / 2), times.end());
  return times[times.size() / 2];
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope fit needs two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double lx = std::log(x[k]), ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ComplexityResult run_complexity_probe(const ComplexitySpec& spec, const SuiteContext& ctx) {
  ComplexityResult res;
  auto probe = [&](const std::string& sweep, std::size_t m, std::size_t d) {
    SbmConfig sc;
    sc.edges = m;
    sc.nodes_per_class = m + m / 4;
    sc.edge_size = spec.edge_size;
    sc.alpha = 1;
    sc.feature_dim = d;
    sc.seed = spec.seed;
    const Dataset ds = generate_sbm(sc);
    ModelConfig mc;
    mc.hidden = d;
    const ModelParams p = init_params(mc, d, 2, m, spec.seed);
    const Matrix x = normalize_rows(*ds.features);
    time_learned_step(ds.graph, x, p, mc, 2);  // warm-up
    const double sec = time_learned_step(ds.graph, x, p, mc, spec.repeats);
    say(ctx, sweep + " m=" + std::to_string(m) + " d=" + std::to_string(d) + " step=" + format_double(sec) + "s");
    res.rows.push_back({sweep, m, ds.graph.num_nodes(), d, sec});
  };
  std::vector<double> xs, ys;
  for (std::size_t m : spec.edges) {
    probe("m", m, spec.feature_dim);
    xs.push_back(static_cast<double>(m));
    ys.push_back(res.rows.back().seconds_per_step);
  }
  if (xs.size() >= 2) res.slope_m = loglog_slope(xs, ys);
  xs.clear();
  ys.clear();
  for (std::size_t d : spec.dims) {
    probe("d", spec.edges_for_dim_sweep, d);
    xs.push_back(static_cast<double>(d));
    ys.push_back(res.rows.back().seconds_per_step);
  }
  if (xs.size() >= 2) res.slope_d = loglog_slope(xs, ys);

  std::vector<std::vector<std::string>> cells;
  for (const auto& r : res.rows) {
    cells.push_back({r.sweep, std::to_string(r.m), std::to_string(r.n), std::to_string(r.d), fmt(r.seconds_per_step)});
  }
  const json cfg{{"suite", "complexity"},
                 {"edges", spec.edges},
                 {"edge_size", spec.edge_size},
                 {"feature_dim", spec.feature_dim},
                 {"dims", spec.dims},
                 {"edges_for_dim_sweep", spec.edges_for_dim_sweep},
                 {"repeats", spec.repeats},
                 {"slope_m", res.slope_m},
                 {"slope_d", res.slope_d}};
  write_csv_with_sidecar(ctx.out_dir / "complexity.csv", {"sweep", "m", "n", "d", "seconds_per_step"}, cells,
                         cfg.dump(), spec.seed);
  return res;
}

}  // namespace rfhnd
