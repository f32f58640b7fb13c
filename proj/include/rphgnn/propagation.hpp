#pragma once

#include <vector>

#include "rphgnn/hetgraph.hpp"
#include "rphgnn/relations.hpp"

namespace rphgnn {

// One relation-wise collection result: rows follow the relation's end type,
// columns follow the state that was propagated (the start type's dimension).
struct CollectedNeighborInfo {
  Relation relation;
  Matrix<float> values;
};

// Single forward hop: mean of the edge's source-type state over in-neighbors.
Matrix<float> collect_odd(const HeteroGraph& g, int edge_type,
                          const Matrix<float>& src_state);

// Two chained hops through the reverse type, reading the destination type's
// own previous state: D^-1 A (D'^-1 A' H).  Never materializes the two-hop
// adjacency.
Matrix<float> collect_even(const HeteroGraph& g, int edge_type,
                           const Matrix<float>& dst_prev_state);

// General chained collection for any validated relation; reads the chain's
// start-type state and applies one degree-normalized hop per edge.
Matrix<float> collect_relation(const HeteroGraph& g, const Relation& r,
                               const std::vector<Matrix<float>>& state_by_type);

// Relation-wise neighbor collection for one vertex type under a scheme:
// one CollectedNeighborInfo per scheme relation, in canonical order.
std::vector<CollectedNeighborInfo> rwnc_collect(
    const HeteroGraph& g, int vertex_type, Scheme scheme,
    const std::vector<Matrix<float>>& state_by_type);

}  // namespace rphgnn
