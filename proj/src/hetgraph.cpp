#include "rphgnn/hetgraph.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "rphgnn/errors.hpp"
#include "rphgnn/kernels.hpp"
#include "rphgnn/rng.hpp"

namespace rphgnn {

int HeteroGraph::vertex_type_id(std::string_view name) const {
  for (std::size_t i = 0; i < vertex_types.size(); ++i)
    if (vertex_types[i].name == name) return static_cast<int>(i);
  return -1;
}

int HeteroGraph::edge_type_id(std::string_view name) const {
  for (std::size_t i = 0; i < edge_types.size(); ++i)
    if (edge_types[i].name == name) return static_cast<int>(i);
  return -1;
}

void HeteroGraph::attach_features(int vt, Matrix<float> values) {
  if (vt < 0 || static_cast<std::size_t>(vt) >= vertex_types.size())
    throw ConfigError("attach_features: unknown vertex type id");
  if (values.rows() != vertex_types[static_cast<std::size_t>(vt)].count)
    throw ConfigError("attach_features: row count does not match vertex count of '" +
                      vertex_types[static_cast<std::size_t>(vt)].name + "'");
  if (has_features(vt))
    throw ConfigError("attach_features: '" +
                      vertex_types[static_cast<std::size_t>(vt)].name +
                      "' already has a feature table");
  features[static_cast<std::size_t>(vt)] = std::move(values);
}

namespace {

using Pair = std::pair<std::uint32_t, std::uint32_t>;

// Builds destination-major CSR from (src, dst) pairs.
CsrAdjacency make_csr(std::size_t src_count, std::size_t dst_count,
                      std::vector<Pair> pairs) {
  // Deduplicate and order rows deterministically: by destination, then source.
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return a.second != b.second ? a.second < b.second : a.first < b.first;
  });
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  CsrAdjacency csr;
  csr.rows = dst_count;
  csr.cols = src_count;
  csr.row_offsets.assign(dst_count + 1, 0);
  for (const Pair& p : pairs) csr.row_offsets[p.second + 1]++;
  for (std::size_t r = 0; r < dst_count; ++r)
    csr.row_offsets[r + 1] += csr.row_offsets[r];
  csr.col_indices.reserve(pairs.size());
  for (const Pair& p : pairs) csr.col_indices.push_back(p.first);
  return csr;
}

}  // namespace

HeteroGraph build_graph(const std::vector<VertexType>& vts,
                        const std::vector<EdgeTypeSpec>& specs) {
  HeteroGraph g;
  std::unordered_map<std::string, int> vt_ids;
  for (const VertexType& vt : vts) {
    if (vt.name.empty()) throw ConfigError("build_graph: empty vertex type name");
    if (!vt_ids.emplace(vt.name, static_cast<int>(g.vertex_types.size())).second)
      throw ConfigError("build_graph: duplicate vertex type '" + vt.name + "'");
    g.vertex_types.push_back(vt);
  }
  g.features.resize(g.vertex_types.size());

  std::unordered_set<std::string> names;
  std::unordered_set<std::string> triples;
  for (const EdgeTypeSpec& spec : specs) {
    auto src_it = vt_ids.find(spec.src);
    auto dst_it = vt_ids.find(spec.dst);
    if (src_it == vt_ids.end())
      throw ConfigError("build_graph: unknown vertex type '" + spec.src + "'");
    if (dst_it == vt_ids.end())
      throw ConfigError("build_graph: unknown vertex type '" + spec.dst + "'");
    const int src = src_it->second, dst = dst_it->second;
    const std::size_t src_n = g.vertex_types[src].count;
    const std::size_t dst_n = g.vertex_types[dst].count;
    if (src_n == 0 || dst_n == 0)
      throw ConfigError("build_graph: edge type '" + spec.name +
                        "' references a vertex type with count 0");
    if (!triples.insert(spec.src + "\x1f" + spec.name + "\x1f" + spec.dst).second)
      throw ConfigError("build_graph: duplicate edge type triple (" + spec.src +
                        ", " + spec.name + ", " + spec.dst + ")");
    if (spec.self_inverse && src != dst)
      throw ConfigError("build_graph: self-inverse edge type '" + spec.name +
                        "' must connect a vertex type to itself");
    for (const Pair& p : spec.pairs) {
      if (p.first >= src_n || p.second >= dst_n)
        throw ConfigError("build_graph: endpoint out of range in edge type '" +
                          spec.name + "'");
    }

    const std::string rev_name = "r." + spec.name;
    if (!names.insert(spec.name).second)
      throw ConfigError("build_graph: duplicate edge type name '" + spec.name + "'");
    if (!spec.self_inverse && !names.insert(rev_name).second)
      throw ConfigError("build_graph: edge type name '" + rev_name +
                        "' collides with a generated reverse type");

    const int fwd_id = static_cast<int>(g.edge_types.size());
    if (spec.self_inverse) {
      // Symmetrize so that the adjacency equals its own transpose.
      std::vector<Pair> sym = spec.pairs;
      sym.reserve(sym.size() * 2);
      for (const Pair& p : spec.pairs) sym.emplace_back(p.second, p.first);
      g.edge_types.push_back({src, dst, spec.name, fwd_id, false, true});
      g.adj.push_back(make_csr(src_n, dst_n, std::move(sym)));
    } else {
      std::vector<Pair> rev;
      rev.reserve(spec.pairs.size());
      for (const Pair& p : spec.pairs) rev.emplace_back(p.second, p.first);
      g.edge_types.push_back({src, dst, spec.name, fwd_id + 1, false, false});
      g.edge_types.push_back({dst, src, rev_name, fwd_id, true, false});
      g.adj.push_back(make_csr(src_n, dst_n, spec.pairs));
      g.adj.push_back(make_csr(dst_n, src_n, std::move(rev)));
    }
  }
  return g;
}

Matrix<float> degree_normalized_product(const CsrAdjacency& adj,
                                        const Matrix<float>& state) {
  return kernels::spmm_mean(adj, state);
}

Matrix<float> gaussian_matrix(std::size_t rows, std::size_t cols,
                              std::uint64_t seed) {
  Matrix<float> m(rows, cols);
  Rng rng(seed);
  for (std::size_t i = 0; i < m.size(); ++i)
    m.data()[i] = static_cast<float>(rng.next_normal());
  return m;
}

void attach_random_embeddings(HeteroGraph& g, int vt, std::size_t dim,
                              std::uint64_t seed) {
  if (vt < 0 || static_cast<std::size_t>(vt) >= g.vertex_types.size())
    throw ConfigError("attach_random_embeddings: unknown vertex type id");
  if (dim == 0) throw ConfigError("attach_random_embeddings: dim must be positive");
  if (g.has_features(vt))
    throw ConfigError("attach_random_embeddings: '" +
                      g.vertex_types[static_cast<std::size_t>(vt)].name +
                      "' already has a feature table");
  g.attach_features(
      vt, gaussian_matrix(g.vertex_types[static_cast<std::size_t>(vt)].count,
                          dim, seed));
}

}  // namespace rphgnn
