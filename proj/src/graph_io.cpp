#include "rphgnn/graph_io.hpp"

#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "rphgnn/binio.hpp"
#include "rphgnn/errors.hpp"
#include "rphgnn/rng.hpp"

namespace fs = std::filesystem;

namespace rphgnn {

namespace {

nlohmann::json parse_json_file(const fs::path& path, const char* what) {
  std::ifstream is(path);
  if (!is)
    throw FormatError(std::string(what) + ": cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string(what) + ": malformed JSON in '" +
                      path.string() + "': " + e.what());
  }
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> read_edge_file(
    const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("edge file missing: '" + path.string() + "'");
  is.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(is.tellg());
  is.seekg(0);
  if (bytes % 8 != 0)
    throw FormatError("edge file '" + path.string() +
                      "' is not a whole number of u32 pairs");
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs(bytes / 8);
  for (auto& p : pairs) {
    p.first = binio::read_u32(is, "edge pair");
    p.second = binio::read_u32(is, "edge pair");
  }
  return pairs;
}

Matrix<float> read_feature_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("feature file missing: '" + path.string() + "'");
  const std::uint32_t rows = binio::read_u32(is, "feature rows");
  const std::uint32_t cols = binio::read_u32(is, "feature cols");
  if (cols == 0) throw FormatError("feature file '" + path.string() +
                                   "' declares zero columns");
  Matrix<float> m(rows, cols);
  binio::read_f32_array(is, m.data(), m.size(), "feature payload");
  char extra;
  is.read(&extra, 1);
  if (is.gcount() != 0)
    throw FormatError("feature file '" + path.string() + "' has trailing bytes");
  return m;
}

void write_feature_file(const fs::path& path, const Matrix<float>& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open '" + path.string() + "'");
  binio::write_u32(os, static_cast<std::uint32_t>(m.rows()));
  binio::write_u32(os, static_cast<std::uint32_t>(m.cols()));
  binio::write_f32_array(os, m.data(), m.size());
}

std::uint64_t hash_file(const fs::path& path, std::uint64_t h) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot hash missing file '" + path.string() + "'");
  char buf[65536];
  while (is) {
    is.read(buf, sizeof(buf));
    h = fnv1a64(buf, static_cast<std::size_t>(is.gcount()), h);
  }
  return h;
}

struct ManifestView {
  nlohmann::json j;
  fs::path dir;
};

ManifestView load_manifest(const std::string& dir) {
  return {parse_json_file(fs::path(dir) / "graph.json", "graph.json"), dir};
}

std::uint64_t content_hash(const ManifestView& mv) {
  // Canonical dump (sorted keys) of the manifest, then every referenced
  // binary payload in manifest order.
  std::uint64_t h = fnv1a64(mv.j.dump());
  try {
    for (const auto& vt : mv.j.at("vertex_types")) {
      if (vt.contains("features"))
        h = hash_file(mv.dir / vt.at("features").get<std::string>(), h);
    }
    for (const auto& et : mv.j.at("edge_types"))
      h = hash_file(mv.dir / et.at("file").get<std::string>(), h);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("graph.json: missing field: ") + e.what());
  }
  return h;
}

}  // namespace

std::string hash_hex(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[h & 0xF];
    h >>= 4;
  }
  return s;
}

std::string graph_dir_hash(const std::string& dir) {
  return hash_hex(content_hash(load_manifest(dir)));
}

LoadedGraph load_graph_dir(const std::string& dir) {
  ManifestView mv = load_manifest(dir);
  LoadedGraph out;
  out.graph_hash = hash_hex(content_hash(mv));

  std::vector<VertexType> vts;
  std::vector<std::pair<int, fs::path>> feature_files;  // (vertex type id, path)
  std::vector<EdgeTypeSpec> specs;
  try {
    for (const auto& vt : mv.j.at("vertex_types")) {
      VertexType v;
      v.name = vt.at("name").get<std::string>();
      v.count = vt.at("count").get<std::size_t>();
      if (vt.contains("features"))
        feature_files.emplace_back(static_cast<int>(vts.size()),
                                   mv.dir / vt.at("features").get<std::string>());
      vts.push_back(std::move(v));
    }
    for (const auto& et : mv.j.at("edge_types")) {
      EdgeTypeSpec spec;
      spec.src = et.at("src").get<std::string>();
      spec.name = et.at("name").get<std::string>();
      spec.dst = et.at("dst").get<std::string>();
      spec.self_inverse = et.value("self_reverse", false);
      spec.pairs = read_edge_file(mv.dir / et.at("file").get<std::string>());
      specs.push_back(std::move(spec));
    }
    out.target = mv.j.at("target_type").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("graph.json: ") + e.what());
  }

  try {
    out.graph = build_graph(vts, specs);
  } catch (const ConfigError& e) {
    // Structural problems in on-disk data are format errors to callers.
    throw FormatError(std::string("graph directory invalid: ") + e.what());
  }
  if (out.graph.vertex_type_id(out.target) < 0)
    throw FormatError("graph.json: unknown target_type '" + out.target + "'");

  for (const auto& [vt_id, path] : feature_files) {
    Matrix<float> m = read_feature_file(path);
    try {
      out.graph.attach_features(vt_id, std::move(m));
    } catch (const ConfigError& e) {
      throw FormatError(std::string("feature table invalid: ") + e.what());
    }
  }
  return out;
}

void save_graph_dir(const std::string& dir, const HeteroGraph& g,
                    const std::string& target,
                    const std::vector<std::uint32_t>* labels,
                    const Split* split) {
  if (g.vertex_type_id(target) < 0)
    throw ConfigError("save_graph_dir: unknown target type '" + target + "'");
  fs::create_directories(fs::path(dir) / "edges");
  fs::create_directories(fs::path(dir) / "features");

  nlohmann::json j;
  j["target_type"] = target;
  j["vertex_types"] = nlohmann::json::array();
  for (std::size_t t = 0; t < g.vertex_types.size(); ++t) {
    nlohmann::json vt;
    vt["name"] = g.vertex_types[t].name;
    vt["count"] = g.vertex_types[t].count;
    if (g.has_features(static_cast<int>(t))) {
      const std::string rel = "features/" + g.vertex_types[t].name + ".bin";
      vt["features"] = rel;
      write_feature_file(fs::path(dir) / rel, g.features[t]);
    }
    j["vertex_types"].push_back(std::move(vt));
  }
  j["edge_types"] = nlohmann::json::array();
  for (std::size_t e = 0; e < g.edge_types.size(); ++e) {
    const EdgeType& et = g.edge_types[e];
    if (et.is_reverse) continue;  // reverses are rebuilt on load
    const std::string rel = "edges/" + et.name + ".bin";
    std::ofstream os(fs::path(dir) / rel, std::ios::binary);
    if (!os) throw FormatError("cannot open '" + rel + "'");
    const CsrAdjacency& adj = g.adj[e];
    for (std::size_t d = 0; d < adj.rows; ++d) {
      for (std::size_t k = adj.row_offsets[d]; k < adj.row_offsets[d + 1]; ++k) {
        binio::write_u32(os, adj.col_indices[k]);
        binio::write_u32(os, static_cast<std::uint32_t>(d));
      }
    }
    j["edge_types"].push_back({{"src", g.vertex_types[et.src].name},
                               {"name", et.name},
                               {"dst", g.vertex_types[et.dst].name},
                               {"file", rel},
                               {"self_reverse", et.self_inverse}});
  }
  std::ofstream os(fs::path(dir) / "graph.json");
  if (!os) throw FormatError("cannot open graph.json for writing");
  os << j.dump(2) << "\n";

  if (labels) {
    const std::size_t count =
        g.vertex_types[static_cast<std::size_t>(g.vertex_type_id(target))].count;
    if (labels->size() != count)
      throw ConfigError("save_graph_dir: label count does not match target count");
    std::ofstream ls(fs::path(dir) / "labels.bin", std::ios::binary);
    for (std::uint32_t v : *labels) binio::write_u32(ls, v);
  }
  if (split) {
    nlohmann::json sj;
    sj["train"] = split->train;
    sj["valid"] = split->valid;
    sj["test"] = split->test;
    std::ofstream ss(fs::path(dir) / "split.json");
    ss << sj.dump(2) << "\n";
  }
}

bool has_labels(const std::string& dir) {
  return fs::exists(fs::path(dir) / "labels.bin");
}

std::vector<std::uint32_t> load_labels(const std::string& dir,
                                       std::size_t expected_count) {
  const fs::path path = fs::path(dir) / "labels.bin";
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("labels.bin missing in '" + dir + "'");
  is.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(is.tellg());
  is.seekg(0);
  if (bytes != expected_count * 4)
    throw FormatError("labels.bin holds " + std::to_string(bytes / 4) +
                      " entries, expected " + std::to_string(expected_count));
  std::vector<std::uint32_t> labels(expected_count);
  for (auto& v : labels) v = binio::read_u32(is, "labels.bin");
  return labels;
}

Split load_split(const std::string& dir) {
  nlohmann::json j =
      parse_json_file(fs::path(dir) / "split.json", "split.json");
  Split s;
  try {
    s.train = j.at("train").get<std::vector<std::uint32_t>>();
    s.valid = j.at("valid").get<std::vector<std::uint32_t>>();
    s.test = j.at("test").get<std::vector<std::uint32_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("split.json: ") + e.what());
  }
  return s;
}

}  // namespace rphgnn
