#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "rfhnd/hypergraph.hpp"
#include "rfhnd/io.hpp"

namespace rfhnd {

/// Two-class contextual hypergraph block model.
struct SbmConfig {
  std::size_t nodes_per_class = 2500;
  std::size_t classes = 2;
  std::size_t edges = 1000;
  std::size_t edge_size = 15;
  std::size_t alpha = 1;  // minority count per edge
  double feature_std = 1.0;
  std::size_t feature_dim = 16;
  double mean_offset = 0.6;  // class means at +/- offset along a random unit direction
  std::uint64_t seed = 0;

  void validate() const;
};

/// Nodes 0..nodes_per_class-1 are class 0, the rest class 1. Every edge holds
/// exactly `alpha` nodes of one class (picked per edge with probability 1/2)
/// and the rest from the other. Nodes left isolated are swapped into an edge
/// slot of a same-class node that has degree > 1, which keeps per-edge counts.
Dataset generate_sbm(const SbmConfig& cfg);

enum class NoiseKind { Gaussian, Uniform, Mask, Structure };
std::string_view to_string(NoiseKind k);
NoiseKind parse_noise_kind(std::string_view s);

struct NoiseConfig {
  NoiseKind kind = NoiseKind::Gaussian;
  double rate = 0.0;
  double sigma = 1.0;        // Gaussian scale at rate 1
  double delta_scale = 1.0;  // Uniform half-width at rate 1
  std::uint64_t seed = 0;

  void validate() const;
};

/// Gaussian: + rate*sigma*N(0,1). Uniform: + U(-rate*delta_scale, +...).
/// Mask: exactly round(rate * rows * cols) entries set to zero.
Matrix apply_feature_noise(const Matrix& x, const NoiseConfig& cfg);

/// Deletes round(rate*m) original edges and inserts as many random edges whose
/// sizes are drawn from the original size distribution. A deletion that would
/// isolate a node is redrawn; after 1000 redraws std::runtime_error is thrown.
Hypergraph apply_structure_noise(const Hypergraph& h, const NoiseConfig& cfg);

/// Applies whichever of the above matches cfg.kind.
Dataset apply_noise(const Dataset& d, const NoiseConfig& cfg);

/// Per-edge count of the less frequent label.
std::vector<std::size_t> minority_counts(const Hypergraph& h, const std::vector<int>& labels);

/// Mean over edges of the fraction of member pairs sharing a label.
double label_agreement(const Hypergraph& h, const std::vector<int>& labels);

}  // namespace rfhnd
