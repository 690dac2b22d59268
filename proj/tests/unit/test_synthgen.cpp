#include <doctest.h>

#include <map>
#include <random>

#include "helpers.hpp"
#include "rfhnd/synthgen.hpp"

using namespace rfhnd;
using namespace testing_support;

namespace {

SbmConfig cfg(std::size_t alpha, std::uint64_t seed, std::size_t edges = 1000) {
  SbmConfig c;
  c.nodes_per_class = 500;
  c.edges = edges;
  c.alpha = alpha;
  c.seed = seed;
  return c;
}

std::size_t class0_count(const Hypergraph& h, const std::vector<int>& labels, EdgeId e) {
  std::size_t k = 0;
  for (NodeId v : h.edge(e)) k += labels[v] == 0;
  return k;
}

}  // namespace

TEST_SUITE("synthgen") {

TEST_CASE("minority counts are exact") {
  for (std::size_t alpha : {1, 3, 7}) {
    Dataset d = generate_sbm(cfg(alpha, alpha));
    REQUIRE(d.graph.num_edges() == 1000);
    for (std::size_t m : minority_counts(d.graph, *d.labels)) CHECK(m == alpha);
    for (EdgeId e = 0; e < 1000; ++e) {
      const auto k = class0_count(d.graph, *d.labels, e);
      CHECK((k == alpha || k == 15 - alpha));
      CHECK(d.graph.edge_size(e) == 15);
    }
  }
}

TEST_CASE("labels are balanced and features have the requested shape") {
  Dataset d = generate_sbm(cfg(2, 5, 200));
  std::size_t zeros = 0;
  for (int l : *d.labels) zeros += l == 0;
  CHECK(zeros == 500);
  CHECK(d.labels->size() == 1000);
  CHECK(d.features->rows() == 1000);
  CHECK(d.features->cols() == 16);
  for (std::size_t i = 0; i < 1000; ++i) CHECK(d.graph.degree(i) >= 1);
}

TEST_CASE("class means sit at opposite offsets") {
  SbmConfig c = cfg(1, 6, 400);
  c.feature_std = 0.0;
  Dataset d = generate_sbm(c);
  const Matrix& f = *d.features;
  const double n0 = std::sqrt(dot(f.row(0), f.row(0)));
  CHECK(n0 == doctest::Approx(0.6));
  for (std::size_t q = 0; q < f.cols(); ++q) CHECK(f(0, q) == doctest::Approx(-f(999, q)));
}

TEST_CASE("generation is byte-deterministic") {
  Dataset a = generate_sbm(cfg(3, 9, 300)), b = generate_sbm(cfg(3, 9, 300));
  CHECK(dump_dataset(a, "f.csv") == dump_dataset(b, "f.csv"));
  CHECK(*a.features == *b.features);
  Dataset c = generate_sbm(cfg(3, 10, 300));
  CHECK_FALSE(*a.features == *c.features);
}

TEST_CASE("invalid configurations") {
  CHECK_THROWS(generate_sbm(cfg(8, 0)));
  CHECK_THROWS(generate_sbm(cfg(0, 0)));
  CHECK_THROWS(generate_sbm(cfg(1, 0, 0)));
  SbmConfig c = cfg(1, 0);
  c.edges = 10;
  CHECK_THROWS_WITH(generate_sbm(c), doctest::Contains("cover"));
}

TEST_CASE("agreement falls strictly as the minority grows") {
  double prev = 2.0;
  for (std::size_t alpha = 1; alpha <= 7; ++alpha) {
    double total = 0;
    for (std::uint64_t s = 0; s < 10; ++s) total += label_agreement(generate_sbm(cfg(alpha, s, 100)).graph,
                                                                     *generate_sbm(cfg(alpha, s, 100)).labels);
    const double mean = total / 10;
    CHECK(mean < prev);
    prev = mean;
  }
}

TEST_CASE("feature noise") {
  std::mt19937_64 rng(1);
  Matrix x = random_matrix(rng, 100, 10);
  NoiseConfig nc;
  nc.rate = 0.0;
  for (auto kind : {NoiseKind::Gaussian, NoiseKind::Uniform, NoiseKind::Mask}) {
    nc.kind = kind;
    CHECK(apply_feature_noise(x, nc) == x);
  }

  nc.kind = NoiseKind::Mask;
  nc.rate = 0.3;
  Matrix masked = apply_feature_noise(x, nc);
  std::size_t zeros = 0;
  for (std::size_t q = 0; q < x.size(); ++q) {
    if (masked.data()[q] == 0.0) ++zeros;
    else CHECK(masked.data()[q] == x.data()[q]);
  }
  CHECK(zeros == 300);

  Matrix big = random_matrix(rng, 1000, 100);
  nc.kind = NoiseKind::Gaussian;
  nc.rate = 0.3;
  nc.sigma = 2.0;
  Matrix g = apply_feature_noise(big, nc);
  double s = 0, s2 = 0;
  for (std::size_t q = 0; q < big.size(); ++q) {
    const double e = g.data()[q] - big.data()[q];
    s += e;
    s2 += e * e;
  }
  const double n = static_cast<double>(big.size());
  const double sd = std::sqrt(s2 / n - (s / n) * (s / n));
  CHECK(std::abs(sd - 0.6) / 0.6 < 0.05);

  nc.kind = NoiseKind::Uniform;
  nc.delta_scale = 1.0;
  nc.rate = 0.4;
  Matrix u = apply_feature_noise(big, nc);
  for (std::size_t q = 0; q < big.size(); ++q) CHECK(std::abs(u.data()[q] - big.data()[q]) <= 0.4);

  nc.rate = 1.5;
  CHECK_THROWS(apply_feature_noise(x, nc));
  nc.rate = -0.1;
  CHECK_THROWS(apply_feature_noise(x, nc));
}

TEST_CASE("structure noise counts and determinism") {
  Dataset d = generate_sbm(cfg(2, 4));
  NoiseConfig nc;
  nc.kind = NoiseKind::Structure;
  nc.rate = 0.0;
  CHECK(apply_structure_noise(d.graph, nc) == d.graph);

  nc.rate = 0.4;
  nc.seed = 8;
  Hypergraph noisy = apply_structure_noise(d.graph, nc);
  CHECK(noisy.num_edges() == 1000);
  std::map<std::vector<NodeId>, int> orig;
  for (const auto& e : d.graph.edge_lists()) ++orig[e];
  int kept = 0;
  auto lists = noisy.edge_lists();
  for (std::size_t e = 0; e < 600; ++e) {
    auto it = orig.find(lists[e]);
    if (it != orig.end() && it->second > 0) {
      --it->second;
      ++kept;
    }
  }
  CHECK(kept == 600);  // 400 deletions
  CHECK(lists.size() - 600 == 400);  // 400 insertions
  CHECK(apply_structure_noise(d.graph, nc) == noisy);
  CHECK(parse_noise_kind("structure") == NoiseKind::Structure);
  CHECK_THROWS(parse_noise_kind("salt"));
}

TEST_CASE("inserted edge sizes follow the original distribution") {
  // Four sizes in proportions 4:3:2:1 over 500 edges on 100 nodes.
  std::mt19937_64 rng(3);
  std::vector<std::vector<NodeId>> edges;
  const std::size_t sizes[] = {2, 3, 4, 5};
  const int share[] = {4, 3, 2, 1};
  std::vector<NodeId> nodes(100);
  std::iota(nodes.begin(), nodes.end(), 0);
  for (int block = 0; block < 50; ++block)
    for (int s = 0; s < 4; ++s)
      for (int r = 0; r < share[s]; ++r) {
        std::shuffle(nodes.begin(), nodes.end(), rng);
        edges.emplace_back(nodes.begin(), nodes.begin() + sizes[s]);
      }
  Hypergraph h(100, edges);

  std::map<std::size_t, double> observed;
  double total = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    NoiseConfig nc;
    nc.kind = NoiseKind::Structure;
    nc.rate = 0.2;
    nc.seed = seed;
    Hypergraph noisy = apply_structure_noise(h, nc);
    for (std::size_t e = 400; e < 500; ++e) {
      observed[noisy.edge_size(e)] += 1;
      total += 1;
    }
  }
  double chi2 = 0;
  for (int s = 0; s < 4; ++s) {
    const double expect = total * share[s] / 10.0;
    chi2 += (observed[sizes[s]] - expect) * (observed[sizes[s]] - expect) / expect;
  }
  CHECK(chi2 < 11.345);  // 0.99 quantile, 3 degrees of freedom
}

TEST_CASE("structure noise keeps every node covered") {
  Hypergraph chainish(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {0, 5}});
  for (std::uint64_t s = 0; s < 20; ++s) {
    NoiseConfig nc;
    nc.kind = NoiseKind::Structure;
    nc.rate = 0.3;
    nc.seed = s;
    Hypergraph out = apply_structure_noise(chainish, nc);
    for (int i = 0; i < 6; ++i) CHECK(out.degree(i) >= 1);
  }
}

TEST_CASE("apply_noise on a dataset") {
  Dataset d = generate_sbm(cfg(2, 1, 200));
  NoiseConfig nc;
  nc.kind = NoiseKind::Gaussian;
  nc.rate = 0.2;
  Dataset out = apply_noise(d, nc);
  CHECK(out.graph == d.graph);
  CHECK(*out.labels == *d.labels);
  CHECK_FALSE(*out.features == *d.features);
}

}  // TEST_SUITE
