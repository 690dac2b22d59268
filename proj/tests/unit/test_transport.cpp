#include <doctest.h>

#include <random>

#include "../oracles/transport_oracle.hpp"
#include "helpers.hpp"
#include "rfhnd/curvature.hpp"
#include "rfhnd/transport.hpp"

using namespace rfhnd;
using namespace testing_support;

namespace {

std::vector<double> simplex(std::mt19937_64& rng, std::size_t k) {
  auto v = random_vector(rng, k, 0.05, 1.0);
  double s = 0;
  for (double x : v) s += x;
  for (double& x : v) x /= s;
  return v;
}

}  // namespace

TEST_SUITE("transport") {

TEST_CASE("simplex matches the enumeration oracle on small problems") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t p = 1 + rng() % 5, q = 1 + rng() % (10 - p > 5 ? 5 : 10 - p);
    auto a = simplex(rng, p), b = simplex(rng, q);
    Matrix c(p, q);
    for (double& v : c.data()) v = static_cast<double>(rng() % 6);
    const auto r = solve_transport(a, b, c);
    CHECK(r.cost == doctest::Approx(oracle::brute_force_transport(a, b, c)).epsilon(1e-12));
    for (std::size_t i = 0; i < p; ++i) {
      double row = 0;
      for (std::size_t j = 0; j < q; ++j) {
        CHECK(r.plan(i, j) >= -1e-14);
        row += r.plan(i, j);
      }
      CHECK(row == doctest::Approx(a[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("degenerate supplies") {
  std::vector<double> a{0.5, 0.5}, b{0.5, 0.5};
  Matrix c(2, 2, std::vector<double>{0, 1, 1, 0});
  CHECK(solve_transport(a, b, c).cost == 0.0);
  std::vector<double> a1{1.0}, b1{0.25, 0.75};
  Matrix c1(1, 2, std::vector<double>{2, 4});
  CHECK(solve_transport(a1, b1, c1).cost == doctest::Approx(3.5));
  CHECK_THROWS(solve_transport(std::vector<double>{1.0}, std::vector<double>{0.5}, Matrix(1, 1)));
}

TEST_CASE("point masses three hops apart") {
  Hypergraph chain(4, {{0, 1}, {1, 2}, {2, 3}});
  HopMetric d(chain);
  NodeMeasure a{{0}, {1.0}}, b{{3}, {1.0}};
  CHECK(wasserstein1(a, b, d) == 3.0);
  CHECK(wasserstein1(a, a, d) == 0.0);
}

TEST_CASE("disconnected support names the pair") {
  Hypergraph two(4, {{0, 1}, {2, 3}});
  HopMetric d(two);
  NodeMeasure a{{0}, {1.0}}, b{{3}, {1.0}};
  CHECK_THROWS_WITH(wasserstein1(a, b, d), doctest::Contains("3"));
}

TEST_CASE("hop distances form a metric") {
  std::mt19937_64 rng(2);
  Hypergraph h = random_hypergraph(rng, 40, 25, 4);
  HopMetric d(h);
  for (int t = 0; t < 500; ++t) {
    const NodeId i = rng() % 40, j = rng() % 40, k = rng() % 40;
    const int ij = d.distance(i, j), jk = d.distance(j, k), ik = d.distance(i, k);
    CHECK(d.distance(i, i) == 0);
    CHECK(ij == d.distance(j, i));
    if (ij >= 0 && jk >= 0) CHECK(ik <= ij + jk);
  }
}

TEST_CASE("wasserstein distance is a metric on random measures") {
  std::mt19937_64 rng(13);
  Hypergraph h = random_hypergraph(rng, 30, 30, 5);
  HopMetric d(h);
  auto measure = [&] {
    NodeMeasure m;
    const std::size_t k = 1 + rng() % 4;
    std::vector<NodeId> pool(30);
    std::iota(pool.begin(), pool.end(), 0);
    std::shuffle(pool.begin(), pool.end(), rng);
    m.support.assign(pool.begin(), pool.begin() + k);
    std::sort(m.support.begin(), m.support.end());
    m.mass = simplex(rng, k);
    return m;
  };
  for (int t = 0; t < 200; ++t) {
    auto a = measure(), b = measure(), c = measure();
    const double ab = wasserstein1(a, b, d), ba = wasserstein1(b, a, d);
    CHECK(std::abs(ab - ba) < 1e-9);
    CHECK(std::abs(wasserstein1(a, a, d)) < 1e-9);
    CHECK(wasserstein1(a, c, d) <= ab + wasserstein1(b, c, d) + 1e-9);
    CHECK(ab >= 0.0);
  }
}

}  // TEST_SUITE
