#include "rphgnn/propagation.hpp"

#include "rphgnn/errors.hpp"
#include "rphgnn/kernels.hpp"

namespace rphgnn {

namespace {

void check_edge_type(const HeteroGraph& g, int edge_type) {
  if (edge_type < 0 || static_cast<std::size_t>(edge_type) >= g.edge_types.size())
    throw ConfigError("unknown edge type id");
}

}  // namespace

Matrix<float> collect_odd(const HeteroGraph& g, int edge_type,
                          const Matrix<float>& src_state) {
  check_edge_type(g, edge_type);
  return kernels::spmm_mean(g.adj[edge_type], src_state);
}

Matrix<float> collect_even(const HeteroGraph& g, int edge_type,
                           const Matrix<float>& dst_prev_state) {
  check_edge_type(g, edge_type);
  const int rev = g.edge_types[edge_type].reverse;
  check_edge_type(g, rev);
  return collect_odd(g, edge_type, collect_odd(g, rev, dst_prev_state));
}

Matrix<float> collect_relation(const HeteroGraph& g, const Relation& r,
                               const std::vector<Matrix<float>>& state_by_type) {
  validate_relation(g, r);
  if (state_by_type.size() != g.vertex_types.size())
    throw ConfigError("collect_relation: state_by_type size mismatch");
  const int start = relation_start_type(g, r);
  const Matrix<float>& h = state_by_type[start];
  if (h.rows() != g.vertex_types[start].count)
    throw ConfigError("collect_relation: state rows do not match '" +
                      g.vertex_types[start].name + "' count");
  Matrix<float> x = kernels::spmm_mean(g.adj[r.edges.front()], h);
  for (std::size_t i = 1; i < r.edges.size(); ++i)
    x = kernels::spmm_mean(g.adj[r.edges[i]], x);
  return x;
}

std::vector<CollectedNeighborInfo> rwnc_collect(
    const HeteroGraph& g, int vertex_type, Scheme scheme,
    const std::vector<Matrix<float>>& state_by_type) {
  std::vector<CollectedNeighborInfo> out;
  for (const Relation& r : scheme_relations(g, vertex_type, scheme)) {
    CollectedNeighborInfo info;
    info.relation = r;
    info.values = collect_relation(g, r, state_by_type);
    out.push_back(std::move(info));
  }
  return out;
}

}  // namespace rphgnn
