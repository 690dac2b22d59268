// Command-line front end: data generation, curvature, flows, diffusion,
// training and the experiment suites.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rfhnd/curvature.hpp"
#include "rfhnd/diffusion.hpp"
#include "rfhnd/experiments.hpp"
#include "rfhnd/io.hpp"
#include "rfhnd/kernels.hpp"
#include "rfhnd/nn.hpp"
#include "rfhnd/ricci_flow.hpp"
#include "rfhnd/synthgen.hpp"
#include "rfhnd/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rfhnd;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  int threads = 0;
  bool json_logs = false;
};

Globals g;

void log_line(const std::string& msg) {
  if (g.json_logs) {
    std::cerr << json{{"msg", msg}}.dump() << "\n";
  } else {
    std::cerr << msg << "\n";
  }
}

fs::path out_path(const std::string& name) {
  fs::create_directories(g.out_dir);
  return fs::path(g.out_dir) / name;
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << j.dump(2) << "\n";
}

std::string fmt(double v) { return format_double(v); }

json to_j(const EnergyReport& r) {
  return {{"times", r.times},
          {"energy", r.energy},
          {"mean_energy", r.mean_energy},
          {"form", std::string(to_string(r.form))},
          {"upper", r.upper},
          {"lower", r.lower},
          {"general_upper", r.general_upper},
          {"general_lower", r.general_lower},
          {"main_upper", r.main_upper},
          {"main_lower", r.main_lower},
          {"regular", r.regular},
          {"within", r.within()},
          {"rho", r.rho},
          {"zeta", r.zeta}};
}

json to_j(const ConvergenceReport& r) {
  json hits = json::array();
  for (const auto& t : r.edge_hit_time) hits.push_back(t ? json(*t) : json());
  return {{"delta", r.delta},
          {"hit_time", r.hit_time ? json(*r.hit_time) : json()},
          {"edge_hit_time", hits},
          {"lipschitz", r.lipschitz},
          {"lipschitz_estimated", r.lipschitz_estimated},
          {"hypothesis_holds", r.hypothesis_holds},
          {"bound", r.bound ? json(*r.bound) : json()},
          {"note", r.note}};
}

// SBM options shared by gen, train and the suites.
void add_sbm_options(CLI::App* app, SbmConfig& c) {
  app->add_option("--alpha", c.alpha, "minority members per edge");
  app->add_option("--n-per-class", c.nodes_per_class, "nodes per class");
  app->add_option("--edges", c.edges, "number of hyperedges");
  app->add_option("--edge-size", c.edge_size, "members per hyperedge");
  app->add_option("--std", c.feature_std, "feature noise std");
  app->add_option("--dim", c.feature_dim, "feature dimension");
  app->add_option("--offset", c.mean_offset, "class mean offset along a random direction");
}

void add_model_options(CLI::App* app, ModelConfig& m, TrainConfig& t, std::string& scatter) {
  app->add_option("--epochs", t.epochs, "training epochs");
  app->add_option("--lr", t.lr, "learning rate");
  app->add_option("--wd", t.weight_decay, "weight decay");
  app->add_option("--dropout", t.dropout, "input dropout");
  app->add_option("--hidden", m.hidden, "hidden width");
  app->add_option("--tau", m.tau, "diffusion step size");
  app->add_option("--steps", m.steps, "diffusion steps (depth)");
  app->add_option("--scatter", scatter, "hypernet reading: pool-transform-repool or pool-only");
}

std::vector<std::uint64_t> seed_list(int count) {
  std::vector<std::uint64_t> s;
  for (int k = 0; k < count; ++k) s.push_back(g.seed + static_cast<std::uint64_t>(k));
  return s;
}

EdgeWeights weights_for(const Dataset& d, bool from_features, const WeightRuleConfig& rule) {
  if (from_features) {
    if (!d.features) throw std::runtime_error("--from-features needs a dataset with features");
    return attribute_weight(d.graph, FeatureMatrix(*d.features), rule);
  }
  if (d.weights) return *d.weights;
  return EdgeWeights::uniform(d.graph.num_edges(), 1.0);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curvature-guided hypergraph diffusion toolkit"};
  app.require_subcommand(1);
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--out-dir", g.out_dir, "output directory");
  app.add_option("--threads", g.threads, "OpenMP threads (0 = runtime default)");
  app.add_flag("--json-logs", g.json_logs, "log progress as JSON lines on stderr");

  // gen
  SbmConfig gen_cfg;
  std::string gen_out = "sbm.json";
  auto* gen = app.add_subcommand("gen", "generate a contextual hypergraph block model");
  add_sbm_options(gen, gen_cfg);
  gen->add_option("--out", gen_out, "output hypergraph file");

  // noise
  NoiseConfig noise_cfg;
  std::string noise_kind = "gaussian", noise_in, noise_out = "noisy.json";
  auto* noise = app.add_subcommand("noise", "apply a noise protocol to a dataset");
  noise->add_option("--kind", noise_kind, "gaussian, uniform, mask or structure");
  noise->add_option("--rate", noise_cfg.rate, "noise rate in [0,1]");
  noise->add_option("--in", noise_in, "input hypergraph file")->required();
  noise->add_option("--out", noise_out, "output hypergraph file");

  // curvature
  std::string curv_in, curv_kind = "forman";
  bool curv_from_features = false;
  CurvatureOptions curv_opt;
  auto* curv = app.add_subcommand("curvature", "per-edge curvature as CSV");
  curv->add_option("--dataset,--in", curv_in, "hypergraph file")->required();
  curv->add_option("--curvature", curv_kind, "forman or ollivier");
  curv->add_flag("--from-features", curv_from_features, "weights from the feature-coupled rule");
  curv->add_flag("--forman-include-self", curv_opt.forman_include_self, "count the edge itself in Forman sums");
  curv->add_flag("--keep-self-mass", curv_opt.keep_self_mass, "keep the walk's self mass in Ollivier measures");

  // flow
  std::string flow_in, flow_kind = "forman";
  double flow_dt = 0.01, flow_delta = 1e-2, flow_eps = 1e-3;
  int flow_steps = 100;
  bool flow_from_features = false;
  auto* flow = app.add_subcommand("flow", "pure weight Ricci flow with convergence report");
  flow->add_option("--dataset,--in", flow_in, "hypergraph file")->required();
  flow->add_option("--curvature", flow_kind, "forman or ollivier");
  flow->add_option("--dt", flow_dt, "time step");
  flow->add_option("--steps", flow_steps, "number of steps");
  flow->add_option("--delta", flow_delta, "curvature threshold");
  flow->add_option("--epsilon", flow_eps, "weight floor of the feature-coupled rule");
  flow->add_flag("--from-features", flow_from_features, "initial weights from the feature-coupled rule");

  // diffuse
  std::string dif_in, dif_mode = "analytic", dif_kind = "forman", dif_params;
  DiffusionConfig dif_cfg;
  std::vector<int> dif_snapshots;
  bool dif_no_cos = false;
  auto* dif = app.add_subcommand("diffuse", "curvature-guided feature diffusion");
  dif->add_option("--dataset,--in", dif_in, "hypergraph file with features")->required();
  dif->add_option("--mode", dif_mode, "analytic or learned");
  dif->add_option("--curvature", dif_kind, "forman or ollivier");
  dif->add_option("--tau", dif_cfg.tau, "step size");
  dif->add_option("--steps", dif_cfg.steps, "number of steps");
  dif->add_option("--epsilon-denominator", dif_cfg.epsilon_denominator, "floor for 1 - (x.m)^2");
  dif->add_flag("--no-cosine", dif_no_cos, "drop the cosine coefficient");
  dif->add_flag("--force", dif_cfg.force, "run even if tau exceeds the stability bound");
  dif->add_option("--params", dif_params, "parameter snapshot for learned mode");
  dif->add_option("--snapshot", dif_snapshots, "steps whose features are exported")->delimiter(',');

  // train
  std::string tr_dataset, tr_ablation = "none", tr_arch = "rfhnd", tr_scatter = "pool-transform-repool";
  SbmConfig tr_sbm;
  tr_sbm.nodes_per_class = 500;
  tr_sbm.edges = 200;
  ModelConfig tr_model;
  TrainConfig tr_train;
  auto* tr = app.add_subcommand("train", "train one model and save its parameters");
  tr->add_option("--dataset", tr_dataset, "hypergraph file with features and labels (else an SBM is generated)");
  add_sbm_options(tr, tr_sbm);
  add_model_options(tr, tr_model, tr_train, tr_scatter);
  tr->add_option("--ablation", tr_ablation, "none, no-cos, no-hypernet or no-both");
  tr->add_option("--arch", tr_arch, "rfhnd or baseline");

  // oversmooth
  OversmoothSpec os;
  os.sbm.nodes_per_class = 500;
  os.sbm.edges = 200;
  os.sbm.alpha = 2;
  int os_seeds = 1;
  std::string os_scatter = "pool-transform-repool";
  bool no_resume = false;
  auto* ov = app.add_subcommand("oversmooth", "accuracy and energy against depth");
  add_sbm_options(ov, os.sbm);
  add_model_options(ov, os.model, os.train, os_scatter);
  ov->add_option("--depths", os.depths, "depth grid")->delimiter(',');
  ov->add_option("--seeds", os_seeds, "number of seeds");
  ov->add_flag("--no-resume", no_resume, "ignore cached runs");

  // robustness
  RobustnessSpec rs;
  rs.sbm.nodes_per_class = 500;
  rs.sbm.edges = 200;
  rs.sbm.alpha = 2;
  int rs_seeds = 5;
  std::string rs_scatter = "pool-transform-repool";
  std::vector<std::string> rs_kinds{"gaussian", "uniform", "mask", "structure"};
  auto* rb = app.add_subcommand("robustness", "accuracy under feature and structure noise");
  add_sbm_options(rb, rs.sbm);
  add_model_options(rb, rs.model, rs.train, rs_scatter);
  rb->add_option("--kinds", rs_kinds, "noise kinds")->delimiter(',');
  rb->add_option("--rates", rs.rates, "noise rates")->delimiter(',');
  rb->add_option("--seeds", rs_seeds, "number of seeds");
  rb->add_flag("--no-resume", no_resume, "ignore cached runs");

  // complexity
  ComplexitySpec cs;
  auto* cx = app.add_subcommand("complexity", "per-step wall time against edge count and feature width");
  cx->add_option("--edges", cs.edges, "edge counts")->delimiter(',');
  cx->add_option("--edge-size", cs.edge_size, "members per edge");
  cx->add_option("--dims", cs.dims, "feature widths")->delimiter(',');
  cx->add_option("--repeats", cs.repeats, "timed repeats per point");

  CLI11_PARSE(app, argc, argv);

  try {
    if (g.threads > 0) set_kernel_threads(g.threads);
    SuiteContext ctx;
    ctx.out_dir = g.out_dir;
    ctx.resume = !no_resume;
    ctx.log = log_line;

    if (gen->parsed()) {
      gen_cfg.seed = g.seed;
      Dataset d = generate_sbm(gen_cfg);
      const fs::path p = out_path(gen_out);
      save_dataset(d, p);
      write_json(p.string() + ".meta.json", {{"git_hash", build_git_hash()}, {"seed", g.seed},
                                             {"config", json::parse(to_json(gen_cfg))}});
      log_line("wrote " + p.string());
    } else if (noise->parsed()) {
      noise_cfg.kind = parse_noise_kind(noise_kind);
      noise_cfg.seed = g.seed;
      Dataset d = apply_noise(load_dataset(noise_in), noise_cfg);
      const fs::path p = out_path(noise_out);
      save_dataset(d, p);
      log_line("wrote " + p.string());
    } else if (curv->parsed()) {
      Dataset d = load_dataset(curv_in);
      EdgeWeights w = weights_for(d, curv_from_features, {});
      CurvatureVector k = curvature(d.graph, w, parse_curvature_kind(curv_kind), curv_opt);
      std::vector<std::vector<std::string>> rows;
      for (std::size_t e = 0; e < k.kappa.size(); ++e) {
        rows.push_back({std::to_string(e), std::to_string(d.graph.edge_size(static_cast<EdgeId>(e))), fmt(w[e]),
                        fmt(k.kappa[e])});
      }
      json cfg{{"dataset", curv_in}, {"curvature", curv_kind}, {"from_features", curv_from_features},
               {"forman_include_self", curv_opt.forman_include_self}, {"keep_self_mass", curv_opt.keep_self_mass}};
      write_csv_with_sidecar(out_path("curvature.csv"), {"edge_id", "size", "weight", "kappa"}, rows, cfg.dump(),
                             g.seed);
    } else if (flow->parsed()) {
      Dataset d = load_dataset(flow_in);
      WeightRuleConfig rule;
      rule.epsilon = flow_eps;
      EdgeWeights w0 = weights_for(d, flow_from_features, rule);
      WeightFlowTrace t = run_weight_flow(d.graph, w0, parse_curvature_kind(flow_kind), flow_dt, flow_steps);
      std::vector<std::vector<std::string>> rows;
      for (std::size_t s = 0; s < t.times.size(); ++s)
        for (std::size_t e = 0; e < t.weights[s].size(); ++e)
          rows.push_back({fmt(t.times[s]), std::to_string(e), fmt(t.weights[s][e]), fmt(t.kappa[s][e])});
      json cfg{{"dataset", flow_in}, {"curvature", flow_kind}, {"dt", flow_dt}, {"steps", flow_steps},
               {"delta", flow_delta}, {"epsilon", flow_eps}, {"from_features", flow_from_features}};
      write_csv_with_sidecar(out_path("flow.csv"), {"t", "edge_id", "w", "kappa"}, rows, cfg.dump(), g.seed);
      ConvergenceReport r = convergence_monitor(t.times, t.kappa, t.weights, flow_delta, flow_eps);
      json report{{"convergence", to_j(r)}, {"stopped", t.stopped}};
      write_json(out_path("flow_report.json"), report);
      if (!t.stopped.empty()) log_line("flow stopped early: " + t.stopped);
    } else if (dif->parsed()) {
      Dataset d = load_dataset(dif_in);
      if (!d.features) throw std::runtime_error("diffuse needs a dataset with features");
      dif_cfg.use_cosine = !dif_no_cos;
      dif_cfg.curvature = parse_curvature_kind(dif_kind);
      KprimeProvider provider;
      Matrix start;
      if (dif_mode == "analytic") {
        dif_cfg.mode = KprimeSource::Analytic;
        provider = analytic_provider(dif_cfg);
        start = *d.features;
      } else if (dif_mode == "learned") {
        if (dif_params.empty()) throw std::runtime_error("learned mode needs --params");
        dif_cfg.mode = KprimeSource::Learned;
        ModelConfig mc;
        auto params = std::make_shared<ModelParams>(load_params(dif_params, &mc));
        Tape t;
        Tape::Var x = t.leaf(*d.features);
        start = t.value(apply(t, bind(t, params->encoder, false), x));
        provider = [params, mc](const Hypergraph& h, const FeatureMatrix& xf, int) {
          return forward_learned_kprime(h, xf.values(), params->node_mlp, params->edge_mlp, mc.scatter);
        };
      } else {
        throw std::runtime_error("unknown mode '" + dif_mode + "'");
      }
      DiffusionResult r = diffuse(d.graph, FeatureMatrix(start), dif_cfg, provider);
      std::vector<std::vector<std::string>> rows;
      for (const auto& s : r.steps) {
        rows.push_back({std::to_string(s.step), fmt(s.energy), fmt(s.max_row_sum), fmt(s.min_weight),
                        fmt(s.max_weight)});
      }
      json cfg{{"dataset", dif_in}, {"mode", dif_mode}, {"curvature", dif_kind}, {"tau", dif_cfg.tau},
               {"steps", dif_cfg.steps}, {"use_cosine", dif_cfg.use_cosine}, {"force", dif_cfg.force},
               {"epsilon_denominator", dif_cfg.epsilon_denominator}};
      write_csv_with_sidecar(out_path("diffuse.csv"), {"step", "energy", "max_row_sum", "min_w", "max_w"}, rows,
                             cfg.dump(), g.seed);
      for (int s : dif_snapshots) {
        if (s < 0 || static_cast<std::size_t>(s) >= r.trajectory.size())
          throw std::runtime_error("snapshot step " + std::to_string(s) + " out of range");
        write_csv_matrix(r.trajectory[s].values(), out_path("features_step" + std::to_string(s) + ".csv"));
      }
      json certs = json::array();
      for (const auto& c : r.certificates) {
        certs.push_back({{"max_row_sum", c.max_row_sum}, {"tau_bound", c.tau_bound}, {"tau_used", c.tau_used},
                         {"applicable", c.applicable}, {"stable", c.stable}});
      }
      json report{{"certificates", certs}};
      if (r.energy_report) report["energy_report"] = to_j(*r.energy_report);
      write_json(out_path("diffuse_report.json"), report);
    } else if (tr->parsed()) {
      tr_model.scatter = parse_scatter_reading(tr_scatter);
      apply_ablation(tr_model, tr_ablation);
      if (tr_arch == "baseline") {
        tr_model.arch = Architecture::MeanBaseline;
      } else if (tr_arch != "rfhnd") {
        throw std::runtime_error("unknown arch '" + tr_arch + "'");
      }
      tr_train.seed = g.seed;
      Dataset d;
      if (tr_dataset.empty()) {
        tr_sbm.seed = g.seed;
        d = generate_sbm(tr_sbm);
      } else {
        d = load_dataset(tr_dataset);
      }
      if (!d.features || !d.labels) throw std::runtime_error("training needs features and labels");
      const Split split = make_split(*d.labels, tr_train);
      TrainResult res = train(d.graph, *d.features, *d.labels, split, tr_model, tr_train);
      json hist = json::array();
      for (const auto& m : res.history) {
        hist.push_back({{"epoch", m.epoch}, {"loss", m.loss}, {"train_acc", m.train_acc}, {"val_acc", m.val_acc},
                        {"test_acc", m.test_acc}});
      }
      json metrics{{"git_hash", build_git_hash()},
                   {"seed", g.seed},
                   {"model", json::parse(to_json(tr_model))},
                   {"train", json::parse(to_json(tr_train))},
                   {"best_epoch", res.best_epoch},
                   {"best_val_acc", res.best_val_acc},
                   {"test_acc", res.test_acc},
                   {"history", hist}};
      if (tr_dataset.empty()) metrics["sbm"] = json::parse(to_json(tr_sbm));
      write_json(out_path("train_metrics.json"), metrics);
      save_params(res.params, tr_model, out_path("params.json").string());
      log_line("test accuracy " + fmt(res.test_acc) + " at epoch " + std::to_string(res.best_epoch));
    } else if (ov->parsed()) {
      os.model.scatter = parse_scatter_reading(os_scatter);
      os.seeds = seed_list(os_seeds);
      run_oversmooth_suite(os, ctx);
    } else if (rb->parsed()) {
      rs.model.scatter = parse_scatter_reading(rs_scatter);
      rs.seeds = seed_list(rs_seeds);
      rs.kinds.clear();
      for (const auto& k : rs_kinds) rs.kinds.push_back(parse_noise_kind(k));
      run_robustness_suite(rs, ctx);
    } else if (cx->parsed()) {
      cs.seed = g.seed;
      ComplexityResult r = run_complexity_probe(cs, ctx);
      log_line("slope vs m " + fmt(r.slope_m) + ", slope vs d " + fmt(r.slope_d));
    }
  } catch (const std::exception& e) {
    if (g.json_logs) {
      std::cerr << json{{"error", e.what()}}.dump() << "\n";
    } else {
      std::cerr << "error: " << e.what() << "\n";
    }
    return 1;
  }
  return 0;
}
