#include "rphgnn/squashing.hpp"

#include "rphgnn/errors.hpp"
#include "rphgnn/kernels.hpp"
#include "rphgnn/rng.hpp"

namespace rphgnn {

std::string rp_strategy_to_string(RpStrategy s) {
  return s == RpStrategy::sparse ? "sparse" : "gaussian";
}

RpStrategy rp_strategy_from_string(const std::string& s) {
  if (s == "sparse") return RpStrategy::sparse;
  if (s == "gaussian") return RpStrategy::gaussian;
  throw ConfigError("unknown random projection strategy '" + s + "'");
}

RpWeights make_rp_weights(const RpConfig& cfg, const std::string& relation_id,
                          int iteration, std::size_t d_in, std::size_t d_out) {
  if (d_in == 0 || d_out == 0)
    throw ConfigError("make_rp_weights: dimensions must be positive");
  if (cfg.p_sp < 0.0 || cfg.p_sp >= 1.0)
    throw ConfigError("make_rp_weights: p_sp must lie in [0, 1)");
  RpWeights w;
  w.relation_id = relation_id;
  w.iteration = iteration;
  w.seed_used = derive_seed(cfg.base_seed, relation_id,
                            static_cast<std::uint64_t>(iteration));
  w.values = Matrix<float>(d_in, d_out);
  Rng rng(w.seed_used);
  if (cfg.strategy == RpStrategy::sparse) {
    const double half = (1.0 - cfg.p_sp) / 2.0;
    for (std::size_t i = 0; i < w.values.size(); ++i) {
      const double u = rng.next_double();
      if (u < cfg.p_sp) continue;  // keep 0
      w.values.data()[i] = (u < cfg.p_sp + half) ? 1.0f : -1.0f;
    }
  } else {
    for (std::size_t i = 0; i < w.values.size(); ++i)
      w.values.data()[i] = static_cast<float>(rng.next_normal());
  }
  return w;
}

void l2_normalize_rows(Matrix<float>& m) { kernels::l2_normalize_rows(m); }

Matrix<float> squash_with_weights(
    const std::vector<CollectedNeighborInfo>& collected, std::size_t rows,
    std::size_t target_dim, const std::vector<Matrix<float>>& weights) {
  if (weights.size() != collected.size())
    throw ConfigError("squash: one weight matrix per collection required");
  Matrix<float> out(rows, target_dim);
  for (std::size_t i = 0; i < collected.size(); ++i) {
    const Matrix<float>& values = collected[i].values;
    if (values.rows() != rows)
      throw ConfigError("squash: collection row count mismatch");
    if (weights[i].rows() != values.cols() || weights[i].cols() != target_dim)
      throw ConfigError("squash: weight shape mismatch");
    Matrix<float> projected = kernels::matmul(values, weights[i]);
    kernels::l2_normalize_rows(projected);
    kernels::add_inplace(out, projected);
  }
  return out;
}

Matrix<float> squash(const HeteroGraph& g,
                     const std::vector<CollectedNeighborInfo>& collected,
                     std::size_t rows, std::size_t target_dim,
                     const RpConfig& cfg, int iteration) {
  std::vector<Matrix<float>> weights;
  weights.reserve(collected.size());
  for (const CollectedNeighborInfo& info : collected) {
    weights.push_back(make_rp_weights(cfg, render_relation(g, info.relation),
                                      iteration, info.values.cols(), target_dim)
                          .values);
  }
  return squash_with_weights(collected, rows, target_dim, weights);
}

}  // namespace rphgnn
