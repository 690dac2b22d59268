#pragma once

#include <span>
#include <vector>

#include "rfhnd/hypergraph.hpp"

// Hot loops over the incidence structure, in two flavours with identical
// signatures. `serial` is the straightforward edge-centric translation and is
// kept as a test reference. `omp` is node-centric (gather, no atomics) and gives
// the same bits for any thread count.
namespace rfhnd {

struct DirectionGrad {
  Matrix x;                    // adjoint w.r.t. the features
  std::vector<double> kprime;  // adjoint w.r.t. the per-edge aggregation weights
};

namespace serial {

/// out_e = sum over i in e of node_w[i] * x_i (empty node_w means all ones).
Matrix edge_sum(const Hypergraph& h, const Matrix& x, std::span<const double> node_w = {});
/// out_i = sum over edges e containing i of edge_w[e] * rows_e (empty edge_w means all ones).
Matrix node_sum(const Hypergraph& h, const Matrix& rows, std::span<const double> edge_w = {});
/// row_i = sum_{e ni i} kprime_e sum_{j in e} (c_ij x_i - x_j) / sqrt(d_i d_j),
/// with c the cosine similarity, or 1 when use_cosine is off.
Matrix update_direction(const Hypergraph& h, const Matrix& x, std::span<const double> kprime, bool use_cosine);
DirectionGrad update_direction_backward(const Hypergraph& h, const Matrix& x, std::span<const double> kprime,
                                        const Matrix& out_bar, bool use_cosine);
/// Per-edge contribution to the Dirichlet energy.
std::vector<double> dirichlet_energy_terms(const Hypergraph& h, const Matrix& x);
/// Per-edge sum over ordered member pairs of cos(x_i, x_j) / sqrt(d_i d_j).
std::vector<double> edge_cosine_mass(const Hypergraph& h, const Matrix& x, bool with_diagonal);
/// Forman curvature with unit node weights.
std::vector<double> forman_curvature(const Hypergraph& h, std::span<const double> w, bool include_self);

}  // namespace serial

namespace omp {

Matrix edge_sum(const Hypergraph& h, const Matrix& x, std::span<const double> node_w = {});
Matrix node_sum(const Hypergraph& h, const Matrix& rows, std::span<const double> edge_w = {});
Matrix update_direction(const Hypergraph& h, const Matrix& x, std::span<const double> kprime, bool use_cosine);
DirectionGrad update_direction_backward(const Hypergraph& h, const Matrix& x, std::span<const double> kprime,
                                        const Matrix& out_bar, bool use_cosine);
std::vector<double> dirichlet_energy_terms(const Hypergraph& h, const Matrix& x);
std::vector<double> edge_cosine_mass(const Hypergraph& h, const Matrix& x, bool with_diagonal);
std::vector<double> forman_curvature(const Hypergraph& h, std::span<const double> w, bool include_self);

}  // namespace omp

/// Threads used by the omp kernels (1 when built without OpenMP).
int kernel_threads();
void set_kernel_threads(int n);

}  // namespace rfhnd
