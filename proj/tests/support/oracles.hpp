#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rphgnn/hetgraph.hpp"
#include "rphgnn/matrix.hpp"
#include "rphgnn/precompute.hpp"
#include "rphgnn/relations.hpp"

namespace testsupport {

rphgnn::Matrix<double> to_double(const rphgnn::Matrix<float>& m);
std::vector<rphgnn::Matrix<double>> features_as_double(
    const rphgnn::HeteroGraph& g);

double max_abs_diff(const rphgnn::Matrix<double>& a,
                    const rphgnn::Matrix<double>& b);
double max_abs_diff(const rphgnn::Matrix<float>& a,
                    const rphgnn::Matrix<double>& b);

// Per-vertex meta-path recursion at 64 bits, independent of the library's
// dense-adjacency oracle: hop l sets row v to the mean of hop-(l-1) rows of
// v's in-neighbors (zero when isolated).
rphgnn::Matrix<double> path_enumeration_aggregate(
    const rphgnn::HeteroGraph& g, const rphgnn::Relation& r,
    const std::vector<rphgnn::Matrix<double>>& state_by_type);

// 64-bit re-implementation of the whole precompute loop using the same
// seeded projection weights; returns K slabs per group in canonical group
// order (matching run_precompute).
std::vector<std::vector<rphgnn::Matrix<double>>> precompute_oracle(
    const rphgnn::HeteroGraph& g, const rphgnn::PrecomputeConfig& cfg);

// Independent recursive chain enumeration; returns rendered relation
// strings, sorted lexicographically.
std::vector<std::string> enumeration_oracle(const rphgnn::HeteroGraph& g,
                                            int target, int max_hops);

// Expected provenance-ledger content for the academic schema (compact
// renderings).  Cell relation lists are compared as sets; labels exactly.
struct GoldenCell {
  std::string group;
  int iteration = 1;
  std::vector<std::string> relations;
  std::string label;
};

std::vector<std::string> golden_local_groups();
std::vector<GoldenCell> golden_local_cells();      // local, K = 4
std::vector<std::string> golden_even_odd_groups();
std::vector<GoldenCell> golden_even_odd_cells();   // even_odd, K = 2

}  // namespace testsupport
