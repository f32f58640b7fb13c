#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rphgnn/matrix.hpp"
#include "rphgnn/propagation.hpp"

namespace rphgnn {

enum class RpStrategy { sparse, gaussian };

std::string rp_strategy_to_string(RpStrategy s);
RpStrategy rp_strategy_from_string(const std::string& s);

struct RpConfig {
  RpStrategy strategy = RpStrategy::sparse;
  double p_sp = 2.0 / 3.0;  // sparse zero probability, in [0, 1)
  std::uint64_t base_seed = 0;
};

struct RpWeights {
  Matrix<float> values;  // d_in x d_out
  std::uint64_t seed_used = 0;
  std::string relation_id;
  int iteration = 0;
};

// Untrained projection for one (relation, iteration) pair.  Sparse entries
// take 0 with probability p_sp and +/-1 with probability (1-p_sp)/2 each;
// gaussian entries are N(0,1).  The seed derives from
// (base_seed, relation_id, iteration), so weights are reproducible without
// being stored.
RpWeights make_rp_weights(const RpConfig& cfg, const std::string& relation_id,
                          int iteration, std::size_t d_in, std::size_t d_out);

// Row-wise L2 normalization; zero rows stay zero.
void l2_normalize_rows(Matrix<float>& m);

// Merges relation-wise collections into one target_dim-wide state:
// sum over relations of Norm(values * W_relation).  An empty collection list
// yields a zero matrix (rows x target_dim).
Matrix<float> squash(const HeteroGraph& g,
                     const std::vector<CollectedNeighborInfo>& collected,
                     std::size_t rows, std::size_t target_dim,
                     const RpConfig& cfg, int iteration);

// Same merge with caller-supplied weights (one per collection, aligned);
// used by tests to inject identity projections.
Matrix<float> squash_with_weights(
    const std::vector<CollectedNeighborInfo>& collected, std::size_t rows,
    std::size_t target_dim, const std::vector<Matrix<float>>& weights);

}  // namespace rphgnn
