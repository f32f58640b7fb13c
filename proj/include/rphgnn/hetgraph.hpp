#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rphgnn/csr.hpp"
#include "rphgnn/matrix.hpp"

namespace rphgnn {

struct VertexType {
  std::string name;
  std::size_t count = 0;
};

struct EdgeType {
  int src = -1;  // vertex type id
  int dst = -1;
  std::string name;   // unique; reverse types are named "r." + name
  int reverse = -1;   // edge type id of the reverse type (may be self)
  bool is_reverse = false;   // generated counterpart of a declared type
  bool self_inverse = false; // declared with reverse_of(e) == e
};

// Input description of one declared edge type.  Pairs are (src, dst) vertex
// indices.  A self-inverse type must connect a vertex type to itself; its
// edge set is symmetrized so the reverse-equals-transpose invariant holds
// with reverse(e) == e.
struct EdgeTypeSpec {
  std::string src;
  std::string name;
  std::string dst;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  bool self_inverse = false;
};

class HeteroGraph {
 public:
  std::vector<VertexType> vertex_types;
  std::vector<EdgeType> edge_types;
  std::vector<CsrAdjacency> adj;          // indexed by edge type id
  std::vector<Matrix<float>> features;    // indexed by vertex type id; empty = absent

  int vertex_type_id(std::string_view name) const;  // -1 when missing
  int edge_type_id(std::string_view name) const;

  bool has_features(int vt) const {
    return vt >= 0 && static_cast<std::size_t>(vt) < features.size() &&
           !features[static_cast<std::size_t>(vt)].empty();
  }
  std::size_t feature_dim(int vt) const {
    return features[static_cast<std::size_t>(vt)].cols();
  }

  // Errors when vt is invalid, the row count disagrees with the vertex
  // count, or a table is already attached.
  void attach_features(int vt, Matrix<float> values);
};

// Builds typed CSR storage plus materialized reverse types.  Duplicate
// (src, name, dst) triples or names, unknown type names, endpoints out of
// range and zero-count referenced types are rejected.  Edge lists are
// deduplicated and sorted, so construction is deterministic.
HeteroGraph build_graph(const std::vector<VertexType>& vts,
                        const std::vector<EdgeTypeSpec>& specs);

// Row-wise mean of src-state rows over in-neighbors: D^-1 A H.
Matrix<float> degree_normalized_product(const CsrAdjacency& adj,
                                        const Matrix<float>& state);

// Seed-deterministic N(0,1) matrix.
Matrix<float> gaussian_matrix(std::size_t rows, std::size_t cols,
                              std::uint64_t seed);

// Attaches N(0,1) embeddings to a featureless vertex type.
void attach_random_embeddings(HeteroGraph& g, int vt, std::size_t dim,
                              std::uint64_t seed);

}  // namespace rphgnn
