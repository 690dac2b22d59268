// Serial reference kernels against their OpenMP counterparts on SBM instances.

#include <benchmark/benchmark.h>

#include <map>
#include <random>

#include "rfhnd/kernels.hpp"
#include "rfhnd/synthgen.hpp"

namespace {

struct Fixture {
  rfhnd::Dataset data;
  rfhnd::Matrix x;
  std::vector<double> kprime;
  std::vector<double> weights;
};

const Fixture& fixture(std::size_t m) {
  static std::map<std::size_t, Fixture> cache;
  auto it = cache.find(m);
  if (it != cache.end()) return it->second;
  rfhnd::SbmConfig c;
  c.edges = m;
  c.nodes_per_class = m + m / 4;
  c.alpha = 3;
  c.feature_dim = 32;
  Fixture f{rfhnd::generate_sbm(c), {}, {}, {}};
  f.x = rfhnd::normalize_rows(*f.data.features);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (std::size_t e = 0; e < m; ++e) {
    f.kprime.push_back(u(rng));
    f.weights.push_back(u(rng) + 1.0);
  }
  return cache.emplace(m, std::move(f)).first->second;
}

template <bool Parallel>
void BM_UpdateDirection(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto out = Parallel ? rfhnd::omp::update_direction(f.data.graph, f.x, f.kprime, true)
                        : rfhnd::serial::update_direction(f.data.graph, f.x, f.kprime, true);
    benchmark::DoNotOptimize(out.data().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.data.graph.num_member_pairs()));
}

template <bool Parallel>
void BM_UpdateBackward(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto g = Parallel ? rfhnd::omp::update_direction_backward(f.data.graph, f.x, f.kprime, f.x, true)
                      : rfhnd::serial::update_direction_backward(f.data.graph, f.x, f.kprime, f.x, true);
    benchmark::DoNotOptimize(g.kprime.data());
  }
}

template <bool Parallel>
void BM_DirichletEnergy(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto t = Parallel ? rfhnd::omp::dirichlet_energy_terms(f.data.graph, f.x)
                      : rfhnd::serial::dirichlet_energy_terms(f.data.graph, f.x);
    benchmark::DoNotOptimize(t.data());
  }
}

template <bool Parallel>
void BM_Forman(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto k = Parallel ? rfhnd::omp::forman_curvature(f.data.graph, f.weights, false)
                      : rfhnd::serial::forman_curvature(f.data.graph, f.weights, false);
    benchmark::DoNotOptimize(k.data());
  }
}

template <bool Parallel>
void BM_EdgeSum(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto s = Parallel ? rfhnd::omp::edge_sum(f.data.graph, f.x) : rfhnd::serial::edge_sum(f.data.graph, f.x);
    benchmark::DoNotOptimize(s.data().data());
  }
}

}  // namespace

#define RFHND_PAIR(name)                                                                            \
  BENCHMARK_TEMPLATE(name, false)->Name(#name "/serial")->RangeMultiplier(4)->Range(250, 4000);   \
  BENCHMARK_TEMPLATE(name, true)->Name(#name "/omp")->RangeMultiplier(4)->Range(250, 4000)

RFHND_PAIR(BM_UpdateDirection);
RFHND_PAIR(BM_UpdateBackward);
RFHND_PAIR(BM_DirichletEnergy);
RFHND_PAIR(BM_Forman);
RFHND_PAIR(BM_EdgeSum);

BENCHMARK_MAIN();
