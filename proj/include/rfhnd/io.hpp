#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rfhnd/hypergraph.hpp"

namespace rfhnd {

/// A hypergraph file plus its optional payloads.
///
/// On disk this is a JSON document:
///   {"n": 3, "m": 2, "edges": [[0,1],[1,2]],
///    "features": "feat.csv", "labels": [0,1,0], "weights": [1.0, 2.0]}
/// `features` is a path (relative to the document) to a headerless CSV with n
/// rows of d comma-separated numbers.
struct Dataset {
  Hypergraph graph;
  std::optional<Matrix> features;
  std::optional<std::vector<int>> labels;
  std::optional<EdgeWeights> weights;
};

/// Parses the JSON document. `base_dir` resolves a relative features path.
Dataset parse_dataset(const std::string& json_text, const std::filesystem::path& base_dir = {});
Dataset load_dataset(const std::filesystem::path& path);

/// Structure-only convenience wrapper around parse_dataset.
Hypergraph load_hypergraph(const std::string& json_text);

/// Canonical JSON text for the dataset. `features_file` is written into the
/// document when features are present.
std::string dump_dataset(const Dataset& ds, const std::string& features_file = {});

/// Writes `path` and, if features are present, a sibling `<stem>.features.csv`.
void save_dataset(const Dataset& ds, const std::filesystem::path& path);

Matrix read_csv_matrix(const std::filesystem::path& path);
void write_csv_matrix(const Matrix& m, const std::filesystem::path& path);

/// Shortest decimal text that parses back to exactly `v` ('.' decimal point,
/// independent of the global locale).
std::string format_double(double v);

}  // namespace rfhnd
