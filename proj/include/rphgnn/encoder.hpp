#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rphgnn/matrix.hpp"
#include "rphgnn/rng.hpp"

namespace rphgnn {

// Trainable head over archived group tensors: per group a 1-D convolution
// across the K iteration slabs followed by a small MLP, then concatenation
// over groups and a fusion MLP producing class logits.
struct EncoderConfig {
  std::size_t hidden_dim = 256;   // d: group representation width
  std::size_t conv_channels = 2;  // C_out
  int group_mlp_layers = 2;       // >= 1; layers before the last use the
  int fusion_mlp_layers = 2;      // nonlinearity + hidden dropout
  double dropout_input = 0.5;     // dr_i, applied to slabs while training
  double dropout_hidden = 0.5;    // dr_h
  std::size_t num_classes = 2;
};

template <typename T>
struct GroupParams {
  Matrix<T> conv_w;                        // K x C_out
  std::vector<T> conv_b;                   // C_out (scalar per channel)
  std::vector<Matrix<T>> mlp_w;            // [0]: (C_out*d_g) x d, then d x d
  std::vector<std::vector<T>> mlp_b;
};

template <typename T>
struct EncoderParams {
  std::vector<GroupParams<T>> groups;
  std::vector<Matrix<T>> fusion_w;  // [0]: (G*d) x ..., last: ... x classes
  std::vector<std::vector<T>> fusion_b;

  std::size_t iterations() const {
    return groups.empty() ? 0 : groups.front().conv_w.rows();
  }
};

// Inverted-dropout multipliers (0 or 1/(1-rate)); an empty matrix means the
// corresponding mask is a no-op.  Masks are sampled once per training step
// and shared by the forward and backward passes.
template <typename T>
struct DropoutMasks {
  std::vector<std::vector<Matrix<T>>> input;         // [group][k]
  std::vector<std::vector<Matrix<T>>> group_hidden;  // [group][layer]
  std::vector<Matrix<T>> fusion_hidden;              // [layer]
};

// Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights, zero biases,
// deterministic in seed.  group_dims[g] is the slab width of group g.
template <typename T>
EncoderParams<T> init_params(const EncoderConfig& cfg,
                             const std::vector<std::size_t>& group_dims,
                             std::size_t iterations, std::uint64_t seed);

template <typename T>
DropoutMasks<T> make_dropout_masks(const EncoderConfig& cfg,
                                   const std::vector<std::size_t>& group_dims,
                                   std::size_t groups, std::size_t iterations,
                                   std::size_t batch, Rng& rng);

// One output matrix per channel: M_c = sum_k conv_w(k,c) * slabs[k] + conv_b[c].
template <typename T>
std::vector<Matrix<T>> conv1d_over_iterations(const std::vector<Matrix<T>>& slabs,
                                              const Matrix<T>& conv_w,
                                              const std::vector<T>& conv_b);

// Evaluation-mode (no dropout) group representation, B x d.
template <typename T>
Matrix<T> group_encode(const std::vector<Matrix<T>>& slabs,
                       const GroupParams<T>& gp, const EncoderConfig& cfg);

// Evaluation-mode logits from per-group representations.
template <typename T>
Matrix<T> fuse_and_classify(const std::vector<Matrix<T>>& group_reprs,
                            const EncoderParams<T>& params,
                            const EncoderConfig& cfg);

// Evaluation-mode logits for a batch; slabs_by_group[g][k] is B x d_g.
template <typename T>
Matrix<T> forward_logits(const EncoderParams<T>& params,
                         const std::vector<std::vector<Matrix<T>>>& slabs_by_group,
                         const EncoderConfig& cfg);

// Mean cross-entropy under fixed dropout masks (training-mode forward).
// Exposed so gradient checks can finite-difference the exact same function
// the backward pass differentiates.
template <typename T>
T loss_with_masks(const EncoderParams<T>& params,
                  const std::vector<std::vector<Matrix<T>>>& slabs_by_group,
                  const std::vector<std::uint32_t>& labels,
                  const EncoderConfig& cfg, const DropoutMasks<T>& masks);

template <typename T>
struct GradResult {
  T loss = T(0);
  EncoderParams<T> grads;
};

template <typename T>
GradResult<T> loss_and_grads_with_masks(
    const EncoderParams<T>& params,
    const std::vector<std::vector<Matrix<T>>>& slabs_by_group,
    const std::vector<std::uint32_t>& labels, const EncoderConfig& cfg,
    const DropoutMasks<T>& masks);

// Samples masks from rng, then runs the masked forward/backward.
template <typename T>
GradResult<T> loss_and_grads(
    const EncoderParams<T>& params,
    const std::vector<std::vector<Matrix<T>>>& slabs_by_group,
    const std::vector<std::uint32_t>& labels, const EncoderConfig& cfg,
    Rng& rng);

// --- Parameter traversal (declared order: groups, then fusion) --------------

template <typename T, typename F>
void for_each_tensor(EncoderParams<T>& p, F&& f) {
  for (auto& gp : p.groups) {
    f(gp.conv_w.data(), gp.conv_w.size());
    f(gp.conv_b.data(), gp.conv_b.size());
    for (std::size_t l = 0; l < gp.mlp_w.size(); ++l) {
      f(gp.mlp_w[l].data(), gp.mlp_w[l].size());
      f(gp.mlp_b[l].data(), gp.mlp_b[l].size());
    }
  }
  for (std::size_t l = 0; l < p.fusion_w.size(); ++l) {
    f(p.fusion_w[l].data(), p.fusion_w[l].size());
    f(p.fusion_b[l].data(), p.fusion_b[l].size());
  }
}

template <typename T, typename F>
void for_each_tensor(const EncoderParams<T>& p, F&& f) {
  for_each_tensor(const_cast<EncoderParams<T>&>(p),
                  [&](T* data, std::size_t n) {
                    f(static_cast<const T*>(data), n);
                  });
}

template <typename T>
std::size_t param_count(const EncoderParams<T>& p) {
  std::size_t n = 0;
  for_each_tensor(p, [&](const T*, std::size_t len) { n += len; });
  return n;
}

// --- Checkpoints -------------------------------------------------------------
// u32 header length + JSON header (config, group relation ids, shapes,
// manifest hash) + parameter blocks as little-endian f32 in declared order.

struct CheckpointMeta {
  EncoderConfig cfg;
  std::vector<std::string> group_relations;
  std::vector<std::size_t> group_dims;
  std::size_t iterations = 0;
  std::string manifest_hash;
};

void save_checkpoint(const std::string& path, const EncoderParams<float>& params,
                     const CheckpointMeta& meta);
std::pair<EncoderParams<float>, CheckpointMeta> load_checkpoint(
    const std::string& path);

}  // namespace rphgnn
