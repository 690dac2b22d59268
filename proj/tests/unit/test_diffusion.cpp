#include <doctest.h>

#include <random>

#include "../oracles/dense_oracle.hpp"
#include "helpers.hpp"
#include "rfhnd/diffusion.hpp"

using namespace rfhnd;
using namespace testing_support;

namespace {

AggregationWeights fixed(std::vector<double> k) { return {std::move(k), KprimeSource::Fixed}; }

Matrix direction(const Hypergraph& h, const Matrix& x, const std::vector<double>& k) {
  return node_update_direction(h, FeatureMatrix::assume_normalized(x), fixed(k), true);
}

Matrix axpy(const Matrix& x, double a, const Matrix& d) {
  Matrix out = x;
  for (std::size_t q = 0; q < out.size(); ++q) out.data()[q] += a * d.data()[q];
  return out;
}

// Fixed-step classical RK4 for dX/dt = -direction(X), no renormalisation.
Matrix rk4(const Hypergraph& h, Matrix x, const std::vector<double>& k, double t_end, int steps) {
  const double dt = t_end / steps;
  for (int s = 0; s < steps; ++s) {
    const Matrix k1 = direction(h, x, k);
    const Matrix k2 = direction(h, axpy(x, -dt / 2, k1), k);
    const Matrix k3 = direction(h, axpy(x, -dt / 2, k2), k);
    const Matrix k4 = direction(h, axpy(x, -dt, k3), k);
    for (std::size_t q = 0; q < x.size(); ++q)
      x.data()[q] -= dt / 6 * (k1.data()[q] + 2 * k2.data()[q] + 2 * k3.data()[q] + k4.data()[q]);
  }
  return x;
}

Matrix euler(const Hypergraph& h, Matrix x, const std::vector<double>& k, double t_end, int steps) {
  const double dt = t_end / steps;
  for (int s = 0; s < steps; ++s) x = axpy(x, -dt, direction(h, x, k));
  return x;
}

}  // namespace

TEST_SUITE("diffusion") {

TEST_CASE("analytic weights match the straight-line formula") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 30; ++t) {
    Hypergraph h = random_hypergraph(rng, 15, 8, 5);
    Matrix x = random_unit_rows(rng, 15, 3);
    const EdgeId e = rng() % 8;
    const double kappa = std::uniform_real_distribution<double>(-3, 3)(rng);
    auto got = analytic_kprime_members(h, FeatureMatrix(x), e, kappa, 1.3, 1e-2);
    auto ref = oracle::kprime_members(15, edge_lists(h), x, e, kappa, 1.3, 1e-2);
    REQUIRE(got.size() == ref.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(ref[i]).epsilon(1e-10));
  }
}

TEST_CASE("zero curvature gives zero weight and identical features stay finite") {
  std::mt19937_64 rng(2);
  Hypergraph h = random_hypergraph(rng, 10, 5, 4);
  Matrix x = random_unit_rows(rng, 10, 3);
  CurvatureVector zero{std::vector<double>(5, 0.0), CurvatureKind::Forman};
  for (double v : analytic_kprime(h, FeatureMatrix(x), zero, EdgeWeights::uniform(5), 1e-2).kprime) CHECK(v == 0.0);

  Matrix same(10, 3);
  for (std::size_t i = 0; i < 10; ++i) same(i, 0) = 1.0;
  CurvatureVector k{std::vector<double>(5, 1.5), CurvatureKind::Forman};
  for (double v : analytic_kprime(h, FeatureMatrix(same), k, EdgeWeights::uniform(5), 1e-2).kprime) {
    CHECK(std::isfinite(v));
    CHECK(v < 0.0);
  }
}

TEST_CASE("analytic weight sign opposes curvature") {
  std::mt19937_64 rng(3);
  Hypergraph h = random_hypergraph(rng, 20, 10, 5);
  Matrix x = random_unit_rows(rng, 20, 3);
  auto kappa = random_vector(rng, 10, -2, 2);
  auto kp = analytic_kprime(h, FeatureMatrix(x), CurvatureVector{kappa, CurvatureKind::Forman},
                            EdgeWeights(random_vector(rng, 10, 0.5, 2)), 1e-2);
  for (std::size_t e = 0; e < 10; ++e) CHECK(kp.kprime[e] * kappa[e] < 0.0);
}

TEST_CASE("update rows are orthogonal to their features") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 50; ++t) {
    Hypergraph h = random_hypergraph(rng, 40, 25, 6);
    Matrix x = random_unit_rows(rng, 40, 6);
    Matrix d = node_update_direction(h, FeatureMatrix(x), fixed(random_vector(rng, 25, -2, 2)), true);
    for (std::size_t i = 0; i < 40; ++i) CHECK(std::abs(dot(x.row(i), d.row(i))) < 1e-9);
  }
}

TEST_CASE("component-constant features are a fixed point") {
  Hypergraph h(6, {{0, 1, 2}, {1, 2}, {3, 4, 5}});
  Matrix x(6, 2);
  for (int i = 0; i < 3; ++i) x(i, 0) = 1.0;
  for (int i = 3; i < 6; ++i) x(i, 1) = -1.0;
  const auto k = fixed({0.7, -1.3, 2.0});
  for (bool cos : {true, false}) {
    Matrix d = node_update_direction(h, FeatureMatrix(x), k, cos);
    for (double v : d.data()) CHECK(v == 0.0);
  }
  auto y = euler_step(FeatureMatrix(x), node_update_direction(h, FeatureMatrix(x), k, true), 0.3, true);
  CHECK(y.values() == x);
}

TEST_CASE("edge loop, matrix form and dense oracles agree") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const int n = 5 + rng() % 46;
    Hypergraph h = random_hypergraph(rng, n, 3 + rng() % 20, 6);
    Matrix x = random_unit_rows(rng, n, 4);
    auto k = random_vector(rng, h.num_edges(), -1.5, 2.0);
    const bool cos = t % 3 != 0;
    const auto edges = edge_lists(h);
    Matrix loop = node_update_direction(h, FeatureMatrix(x), fixed(k), cos);
    Matrix op = assemble_matrices(h, FeatureMatrix(x), fixed(k), cos).apply(x);
    CHECK(max_abs_diff(loop, op) < 1e-9);
    CHECK(max_abs_diff(loop, oracle::update_loop(n, edges, x, k, cos)) < 1e-9);
    CHECK(max_abs_diff(op, oracle::matrix_form(n, edges, x, k, cos)) < 1e-9);
  }
}

TEST_CASE("assembled operator") {
  std::mt19937_64 rng(6);
  SUBCASE("single spanning edge with unit weight") {
    Hypergraph h(6, {{0, 1, 2, 3, 4, 5}, {0, 1}});
    Matrix x = random_unit_rows(rng, 6, 3);
    auto op = assemble_matrices(h, FeatureMatrix(x), fixed({1.0, 1.0}));
    CHECK(max_abs_diff(op.dense_s(), oracle::s_matrix(6, edge_lists(h), {1.0, 1.0})) < 1e-14);
    CHECK(max_abs_diff(op.dense_c(), oracle::c_matrix(6, edge_lists(h), x, true)) < 1e-14);
  }
  SUBCASE("identical rows give the plain Laplacian form") {
    Hypergraph h = random_hypergraph(rng, 8, 4, 4);
    Matrix x(8, 2);
    for (std::size_t i = 0; i < 8; ++i) x(i, 0) = 1.0;
    auto op = assemble_matrices(h, FeatureMatrix(x), fixed({1.0, 2.0, 0.5, 1.0}));
    Matrix c = op.dense_c();
    Matrix s = op.dense_s();
    for (std::size_t q = 0; q < c.size(); ++q)
      if (s.data()[q] != 0.0) CHECK(c.data()[q] == 1.0);
    const Matrix fx = op.apply(x);
    for (double v : fx.data()) CHECK(std::abs(v) < 1e-14);
  }
  SUBCASE("S is symmetric") {
    for (int t = 0; t < 20; ++t) {
      Hypergraph h = random_hypergraph(rng, 30, 20, 6);
      auto op = assemble_matrices(h, FeatureMatrix(random_unit_rows(rng, 30, 3)),
                                  fixed(random_vector(rng, 20, -1, 3)));
      Matrix s = op.dense_s();
      for (std::size_t i = 0; i < 30; ++i)
        for (std::size_t j = 0; j < 30; ++j) CHECK(s(i, j) == s(j, i));
      for (std::size_t i = 0; i < 30; ++i)
        for (std::size_t j = 0; j < 30; ++j) CHECK(op.s_at(i, j) == s(i, j));
    }
  }
}

TEST_CASE("stability certificate arithmetic") {
  auto c = stability_bound(2.0, 0.5);
  CHECK(c.applicable);
  CHECK(c.tau_bound == 0.5);
  CHECK(c.stable);
  CHECK_FALSE(stability_bound(2.0, 0.51).stable);
  CHECK_FALSE(stability_bound(-1.0, 0.1).applicable);

  std::mt19937_64 rng(7);
  Hypergraph h = random_hypergraph(rng, 25, 15, 5);
  auto k = random_vector(rng, 15, 0.1, 2.0);
  auto scaled = k;
  for (double& v : scaled) v *= 3.0;
  const double base = max_row_sum(h, fixed(k));
  CHECK(stability_bound(max_row_sum(h, fixed(scaled)), 0.1).tau_bound ==
        doctest::Approx(stability_bound(base, 0.1).tau_bound / 3.0).epsilon(1e-12));
  auto op = assemble_matrices(h, FeatureMatrix(random_unit_rows(rng, 25, 3)), fixed(k));
  CHECK(stability_bound(op, 0.1).max_row_sum == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("Euler step") {
  std::mt19937_64 rng(8);
  FeatureMatrix x(random_matrix(rng, 10, 3));
  CHECK(euler_step(x, Matrix(10, 3), 0.4, false).values() == x.values());
  Matrix bad(10, 3);
  bad(2, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_WITH(euler_step(x, bad, 0.1, false, 7), doctest::Contains("7"));
}

TEST_CASE("Euler converges at first order against an RK4 reference") {
  std::mt19937_64 rng(9);
  Hypergraph h = random_hypergraph(rng, 12, 8, 4);
  Matrix x = random_unit_rows(rng, 12, 3);
  auto k = random_vector(rng, 8, 0.2, 1.0);
  const double t_end = 0.2;
  const Matrix ref = rk4(h, x, k, t_end, 400);
  CHECK(max_abs_diff(rk4(h, x, k, t_end, 200), ref) < 1e-12);

  // Richardson: the one-step vs two-half-step gap shrinks fourfold as tau halves.
  const double tau = 0.05;
  auto gap = [&](double t) { return max_abs_diff(euler(h, x, k, t, 1), euler(h, x, k, t, 2)); };
  const double ratio = gap(tau) / gap(tau / 2);
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.1));

  const double e1 = max_abs_diff(euler(h, x, k, t_end, 20), ref);
  const double e2 = max_abs_diff(euler(h, x, k, t_end, 40), ref);
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("diffuse") {
  std::mt19937_64 rng(10);
  Hypergraph h = random_hypergraph(rng, 40, 25, 6);
  FeatureMatrix x0(random_matrix(rng, 40, 4));
  DiffusionConfig cfg;
  cfg.tau = 0.05;
  cfg.force = true;

  SUBCASE("no steps") {
    cfg.steps = 0;
    auto r = diffuse(h, x0, cfg, analytic_provider(cfg));
    REQUIRE(r.trajectory.size() == 1);
    CHECK(r.trajectory[0].values() == x0.values());
  }
  SUBCASE("recorded energies match recomputation from snapshots") {
    cfg.steps = 6;
    auto r = diffuse(h, x0, cfg, analytic_provider(cfg));
    REQUIRE(r.trajectory.size() == 7);
    REQUIRE(r.steps.size() == 7);
    for (std::size_t s = 0; s < r.trajectory.size(); ++s) {
      CHECK(r.steps[s].energy ==
            doctest::Approx(oracle::dirichlet(40, edge_lists(h), r.trajectory[s].values())).epsilon(1e-12));
      for (std::size_t i = 0; i < 40; ++i)
        CHECK(std::sqrt(dot(r.trajectory[s].row(i), r.trajectory[s].row(i))) == doctest::Approx(1.0));
    }
  }
  SUBCASE("refuses a step beyond the bound unless forced") {
    cfg.force = false;
    cfg.tau = 100.0;
    cfg.steps = 2;
    CHECK_THROWS(diffuse(h, x0, cfg, fixed_provider(std::vector<double>(25, 1.0))));
    cfg.force = true;
    CHECK_NOTHROW(diffuse(h, x0, cfg, fixed_provider(std::vector<double>(25, 1.0))));
  }
}

TEST_CASE("cosine-free smoothing with positive weights never raises energy") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    Hypergraph h = random_hypergraph(rng, 30, 20, 5);
    auto k = random_vector(rng, 20, 0.1, 1.0);
    DiffusionConfig cfg;
    cfg.use_cosine = false;
    cfg.renormalize = false;
    cfg.steps = 30;
    cfg.tau = stability_bound(max_row_sum(h, fixed(k)), 1.0).tau_bound;
    auto r = diffuse(h, FeatureMatrix(random_matrix(rng, 30, 3)), cfg, fixed_provider(k));
    for (std::size_t s = 1; s < r.steps.size(); ++s) CHECK(r.steps[s].energy <= r.steps[s - 1].energy + 1e-12);
  }
}

}  // TEST_SUITE
