#include "rfhnd/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace rfhnd {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double parse_double(std::string_view tok, std::size_t line) {
  while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
  while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r')) tok.remove_suffix(1);
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw std::runtime_error("CSV line " + std::to_string(line) + ": bad number '" + std::string(tok) + "'");
  }
  return v;
}

}  // namespace

Matrix read_csv_matrix(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  std::vector<double> data;
  std::size_t rows = 0, cols = 0, line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      std::string_view tok = line.substr(start, comma == std::string_view::npos ? line.size() - start : comma - start);
      data.push_back(parse_double(tok, line_no));
      ++count;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw std::runtime_error("CSV line " + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                               " columns, got " + std::to_string(count));
    }
    ++rows;
  }
  return Matrix(rows, cols, std::move(data));
}

void write_csv_matrix(const Matrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  std::string line;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    line.clear();
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) line += ',';
      line += format_double(m(i, j));
    }
    line += '\n';
    out << line;
  }
}

Dataset parse_dataset(const std::string& json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("malformed hypergraph document: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("n") || !doc.contains("m") || !doc.contains("edges")) {
    throw std::runtime_error("hypergraph document needs \"n\", \"m\" and \"edges\"");
  }
  const auto n = doc.at("n").get<long long>();
  const auto m = doc.at("m").get<long long>();
  if (n < 0 || m < 0) throw std::runtime_error("negative n or m");
  const auto& edges_json = doc.at("edges");
  if (!edges_json.is_array() || static_cast<long long>(edges_json.size()) != m) {
    throw std::runtime_error("\"edges\" must be a list of m=" + std::to_string(m) + " node lists");
  }
  std::vector<std::vector<NodeId>> edges;
  edges.reserve(edges_json.size());
  for (const auto& e : edges_json) edges.push_back(e.get<std::vector<NodeId>>());

  Dataset ds{Hypergraph(static_cast<std::size_t>(n), std::move(edges)), std::nullopt, std::nullopt, std::nullopt};

  if (doc.contains("weights")) {
    auto w = doc.at("weights").get<std::vector<double>>();
    if (static_cast<long long>(w.size()) != m) throw std::runtime_error("\"weights\" must have m entries");
    ds.weights = EdgeWeights(std::move(w));
  }
  if (doc.contains("labels")) {
    auto y = doc.at("labels").get<std::vector<int>>();
    if (static_cast<long long>(y.size()) != n) throw std::runtime_error("\"labels\" must have n entries");
    ds.labels = std::move(y);
  }
  if (doc.contains("features")) {
    std::filesystem::path p = doc.at("features").get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    Matrix f = read_csv_matrix(p);
    if (static_cast<long long>(f.rows()) != n) {
      throw std::runtime_error("feature CSV has " + std::to_string(f.rows()) + " rows, expected " + std::to_string(n));
    }
    ds.features = std::move(f);
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path) {
  return parse_dataset(read_text(path), path.parent_path());
}

Hypergraph load_hypergraph(const std::string& json_text) {
  return parse_dataset(json_text).graph;
}

std::string dump_dataset(const Dataset& ds, const std::string& features_file) {
  const Hypergraph& h = ds.graph;
  std::string out;
  out += "{\n  \"n\": " + std::to_string(h.num_nodes()) + ",\n  \"m\": " + std::to_string(h.num_edges()) +
         ",\n  \"edges\": [\n";
  for (std::size_t e = 0; e < h.num_edges(); ++e) {
    out += "    [";
    auto members = h.edge(static_cast<EdgeId>(e));
    for (std::size_t k = 0; k < members.size(); ++k) {
      if (k) out += ',';
      out += std::to_string(members[k]);
    }
    out += e + 1 < h.num_edges() ? "],\n" : "]\n";
  }
  out += "  ]";
  if (ds.weights) {
    out += ",\n  \"weights\": [";
    for (std::size_t e = 0; e < ds.weights->size(); ++e) {
      if (e) out += ',';
      out += format_double((*ds.weights)[e]);
    }
    out += "]";
  }
  if (ds.labels) {
    out += ",\n  \"labels\": [";
    for (std::size_t i = 0; i < ds.labels->size(); ++i) {
      if (i) out += ',';
      out += std::to_string((*ds.labels)[i]);
    }
    out += "]";
  }
  if (ds.features && !features_file.empty()) {
    out += ",\n  \"features\": " + json(features_file).dump();
  }
  out += "\n}\n";
  return out;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::string features_file;
  if (ds.features) {
    features_file = path.stem().string() + ".features.csv";
    write_csv_matrix(*ds.features, path.parent_path() / features_file);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << dump_dataset(ds, features_file);
}

}  // namespace rfhnd
