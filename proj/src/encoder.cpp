#include "rphgnn/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "rphgnn/binio.hpp"
#include "rphgnn/errors.hpp"
#include "rphgnn/kernels.hpp"

namespace rphgnn {

namespace {

void check_config(const EncoderConfig& cfg) {
  if (cfg.hidden_dim == 0) throw ConfigError("encoder: hidden_dim must be positive");
  if (cfg.conv_channels == 0)
    throw ConfigError("encoder: conv_channels must be positive");
  if (cfg.group_mlp_layers < 1 || cfg.fusion_mlp_layers < 1)
    throw ConfigError("encoder: MLP layer counts must be at least 1");
  if (cfg.num_classes < 2) throw ConfigError("encoder: num_classes must be >= 2");
  if (cfg.dropout_input < 0.0 || cfg.dropout_input >= 1.0 ||
      cfg.dropout_hidden < 0.0 || cfg.dropout_hidden >= 1.0)
    throw ConfigError("encoder: dropout rates must lie in [0, 1)");
}

template <typename T>
EncoderParams<T> params_shell(const EncoderConfig& cfg,
                              const std::vector<std::size_t>& group_dims,
                              std::size_t iterations) {
  check_config(cfg);
  if (group_dims.empty()) throw ConfigError("encoder: no groups");
  if (iterations == 0) throw ConfigError("encoder: iterations must be positive");
  EncoderParams<T> p;
  const std::size_t d = cfg.hidden_dim;
  for (std::size_t dg : group_dims) {
    if (dg == 0) throw ConfigError("encoder: zero-width group");
    GroupParams<T> gp;
    gp.conv_w = Matrix<T>(iterations, cfg.conv_channels);
    gp.conv_b.assign(cfg.conv_channels, T(0));
    std::size_t in = cfg.conv_channels * dg;
    for (int l = 0; l < cfg.group_mlp_layers; ++l) {
      gp.mlp_w.emplace_back(in, d);
      gp.mlp_b.emplace_back(d, T(0));
      in = d;
    }
    p.groups.push_back(std::move(gp));
  }
  std::size_t in = group_dims.size() * d;
  for (int l = 0; l < cfg.fusion_mlp_layers; ++l) {
    const std::size_t out = (l == cfg.fusion_mlp_layers - 1) ? cfg.num_classes : d;
    p.fusion_w.emplace_back(in, out);
    p.fusion_b.emplace_back(out, T(0));
    in = out;
  }
  return p;
}

template <typename T>
void fill_uniform(Matrix<T>& w, std::size_t fan_in, Rng& rng) {
  const T a = T(1) / std::sqrt(static_cast<T>(fan_in));
  for (std::size_t i = 0; i < w.size(); ++i)
    w.data()[i] = static_cast<T>(rng.next_double() * 2.0 - 1.0) * a;
}

template <typename T>
void apply_mask(Matrix<T>& m, const Matrix<T>& mask) {
  if (mask.empty()) return;
  check_same_shape(m.rows(), m.cols(), mask.rows(), mask.cols(), "dropout mask");
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] *= mask.data()[i];
}

template <typename T>
void add_bias_rows(Matrix<T>& m, const std::vector<T>& b) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    T* row = m.row(r);
    for (std::size_t j = 0; j < m.cols(); ++j) row[j] += b[j];
  }
}

template <typename T>
Matrix<T> tanh_of(const Matrix<T>& m) {
  Matrix<T> out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i)
    out.data()[i] = std::tanh(m.data()[i]);
  return out;
}

template <typename T>
struct GroupTrace {
  std::vector<Matrix<T>> inputs;  // input of each MLP layer; [0] = conv output
  std::vector<Matrix<T>> acts;    // tanh outputs (pre-dropout) per hidden layer
  Matrix<T> repr;
};

template <typename T>
struct Trace {
  std::vector<GroupTrace<T>> groups;
  std::vector<Matrix<T>> fusion_inputs;  // [0] = concatenated representations
  std::vector<Matrix<T>> fusion_acts;
  Matrix<T> logits;
};

template <typename T>
void check_slabs(const std::vector<std::vector<Matrix<T>>>& slabs_by_group,
                 const EncoderParams<T>& params) {
  if (slabs_by_group.size() != params.groups.size())
    throw ConfigError("encoder: group count mismatch");
  const std::size_t k = params.iterations();
  std::size_t batch = 0;
  for (std::size_t g = 0; g < slabs_by_group.size(); ++g) {
    if (slabs_by_group[g].size() != k)
      throw ConfigError("encoder: slab count does not match conv iterations");
    for (const Matrix<T>& s : slabs_by_group[g]) {
      if (g == 0 && batch == 0) batch = s.rows();
      if (s.rows() != slabs_by_group[0][0].rows())
        throw ConfigError("encoder: inconsistent batch size across slabs");
      if (s.cols() != slabs_by_group[g][0].cols())
        throw ConfigError("encoder: inconsistent slab width inside a group");
    }
  }
}

// Z(b, c*d_g + j) = conv_b[c] + sum_k conv_w(k,c) * slab_k(b, j), with the
// optional inverted-dropout mask folded into the slab read.
template <typename T>
Matrix<T> conv_forward(const std::vector<Matrix<T>>& slabs,
                       const GroupParams<T>& gp,
                       const std::vector<Matrix<T>>* in_masks) {
  const std::size_t k_total = slabs.size();
  const std::size_t dg = slabs[0].cols();
  const std::size_t cc = gp.conv_b.size();
  const std::size_t batch = slabs[0].rows();
  Matrix<T> z(batch, cc * dg);
  const std::int64_t bn = static_cast<std::int64_t>(batch);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < bn; ++b) {
    T* zrow = z.row(b);
    for (std::size_t c = 0; c < cc; ++c)
      for (std::size_t j = 0; j < dg; ++j) zrow[c * dg + j] = gp.conv_b[c];
    for (std::size_t k = 0; k < k_total; ++k) {
      const T* srow = slabs[k].row(b);
      const T* mrow =
          (in_masks && k < in_masks->size() && !(*in_masks)[k].empty())
              ? (*in_masks)[k].row(b)
              : nullptr;
      for (std::size_t c = 0; c < cc; ++c) {
        const T w = gp.conv_w(k, c);
        T* dst = zrow + c * dg;
        if (mrow) {
          for (std::size_t j = 0; j < dg; ++j) dst[j] += w * srow[j] * mrow[j];
        } else {
          for (std::size_t j = 0; j < dg; ++j) dst[j] += w * srow[j];
        }
      }
    }
  }
  return z;
}

// Shared MLP forward; masks may be null (evaluation mode).
template <typename T>
Matrix<T> mlp_forward(Matrix<T> input, const std::vector<Matrix<T>>& ws,
                      const std::vector<std::vector<T>>& bs,
                      const std::vector<Matrix<T>>* hidden_masks,
                      std::vector<Matrix<T>>& inputs_out,
                      std::vector<Matrix<T>>& acts_out) {
  Matrix<T> h = std::move(input);
  for (std::size_t l = 0; l < ws.size(); ++l) {
    inputs_out.push_back(h);
    Matrix<T> pre = kernels::matmul(inputs_out.back(), ws[l]);
    add_bias_rows(pre, bs[l]);
    if (l + 1 < ws.size()) {
      Matrix<T> act = tanh_of(pre);
      acts_out.push_back(act);
      if (hidden_masks && l < hidden_masks->size())
        apply_mask(act, (*hidden_masks)[l]);
      h = std::move(act);
    } else {
      h = std::move(pre);
    }
  }
  return h;
}

template <typename T>
Trace<T> forward_trace(const EncoderParams<T>& params,
                       const std::vector<std::vector<Matrix<T>>>& slabs_by_group,
                       const EncoderConfig& cfg, const DropoutMasks<T>* masks) {
  check_config(cfg);
  check_slabs(slabs_by_group, params);
  const std::size_t gcount = params.groups.size();
  const std::size_t batch = slabs_by_group[0][0].rows();
  const std::size_t d = cfg.hidden_dim;

  Trace<T> trace;
  trace.groups.resize(gcount);
  Matrix<T> x(batch, gcount * d);
  for (std::size_t g = 0; g < gcount; ++g) {
    const GroupParams<T>& gp = params.groups[g];
    GroupTrace<T>& gt = trace.groups[g];
    const std::vector<Matrix<T>>* in_masks =
        (masks && g < masks->input.size()) ? &masks->input[g] : nullptr;
    const std::vector<Matrix<T>>* hid_masks =
        (masks && g < masks->group_hidden.size()) ? &masks->group_hidden[g]
                                                  : nullptr;
    Matrix<T> z = conv_forward(slabs_by_group[g], gp, in_masks);
    gt.repr = mlp_forward(std::move(z), gp.mlp_w, gp.mlp_b, hid_masks,
                          gt.inputs, gt.acts);
    for (std::size_t b = 0; b < batch; ++b) {
      const T* src = gt.repr.row(b);
      T* dst = x.row(b) + g * d;
      for (std::size_t j = 0; j < d; ++j) dst[j] = src[j];
    }
  }
  trace.logits = mlp_forward(std::move(x), params.fusion_w, params.fusion_b,
                             masks ? &masks->fusion_hidden : nullptr,
                             trace.fusion_inputs, trace.fusion_acts);
  return trace;
}

// Mean cross-entropy; writes softmax probabilities over logits in place.
template <typename T>
T softmax_ce_inplace(Matrix<T>& logits, const std::vector<std::uint32_t>& labels) {
  if (labels.size() != logits.rows())
    throw ConfigError("encoder: label count does not match batch size");
  double loss = 0.0;
  for (std::size_t b = 0; b < logits.rows(); ++b) {
    T* row = logits.row(b);
    if (labels[b] >= logits.cols())
      throw ConfigError("encoder: label out of range");
    T mx = row[0];
    for (std::size_t j = 1; j < logits.cols(); ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < logits.cols(); ++j) {
      row[j] = std::exp(row[j] - mx);
      sum += static_cast<double>(row[j]);
    }
    const T inv = static_cast<T>(1.0 / sum);
    for (std::size_t j = 0; j < logits.cols(); ++j) row[j] *= inv;
    loss -= std::log(static_cast<double>(row[labels[b]]));
  }
  return static_cast<T>(loss / static_cast<double>(logits.rows()));
}

// Backward through one MLP given the gradient of its output; returns the
// gradient of its input.
template <typename T>
Matrix<T> mlp_backward(const std::vector<Matrix<T>>& ws,
                       const std::vector<Matrix<T>>& inputs,
                       const std::vector<Matrix<T>>& acts,
                       const std::vector<Matrix<T>>* hidden_masks,
                       Matrix<T> dout, std::vector<Matrix<T>>& dws,
                       std::vector<std::vector<T>>& dbs) {
  for (std::size_t li = ws.size(); li-- > 0;) {
    kernels::matmul_tn(inputs[li], dout, dws[li]);
    std::vector<T>& db = dbs[li];
    for (std::size_t b = 0; b < dout.rows(); ++b) {
      const T* row = dout.row(b);
      for (std::size_t j = 0; j < dout.cols(); ++j) db[j] += row[j];
    }
    Matrix<T> din;
    kernels::matmul_nt(dout, ws[li], din);
    if (li > 0) {
      if (hidden_masks && li - 1 < hidden_masks->size())
        apply_mask(din, (*hidden_masks)[li - 1]);
      const Matrix<T>& act = acts[li - 1];
      for (std::size_t i = 0; i < din.size(); ++i)
        din.data()[i] *= T(1) - act.data()[i] * act.data()[i];
    }
    dout = std::move(din);
  }
  return dout;
}

template <typename T>
void conv_backward(const std::vector<Matrix<T>>& slabs,
                   const std::vector<Matrix<T>>* in_masks, const Matrix<T>& dz,
                   Matrix<T>& dconv_w, std::vector<T>& dconv_b) {
  const std::size_t k_total = slabs.size();
  const std::size_t dg = slabs[0].cols();
  const std::size_t cc = dconv_b.size();
  const std::size_t batch = slabs[0].rows();
  for (std::size_t c = 0; c < cc; ++c) {
    double db = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
      const T* drow = dz.row(b) + c * dg;
      for (std::size_t j = 0; j < dg; ++j) db += static_cast<double>(drow[j]);
    }
    dconv_b[c] += static_cast<T>(db);
    for (std::size_t k = 0; k < k_total; ++k) {
      double dw = 0.0;
      for (std::size_t b = 0; b < batch; ++b) {
        const T* srow = slabs[k].row(b);
        const T* drow = dz.row(b) + c * dg;
        const T* mrow =
            (in_masks && k < in_masks->size() && !(*in_masks)[k].empty())
                ? (*in_masks)[k].row(b)
                : nullptr;
        if (mrow) {
          for (std::size_t j = 0; j < dg; ++j)
            dw += static_cast<double>(srow[j] * mrow[j] * drow[j]);
        } else {
          for (std::size_t j = 0; j < dg; ++j)
            dw += static_cast<double>(srow[j] * drow[j]);
        }
      }
      dconv_w(k, c) += static_cast<T>(dw);
    }
  }
}

template <typename T>
Matrix<T> sample_mask(std::size_t rows, std::size_t cols, double rate,
                      Rng& rng) {
  if (rate <= 0.0) return {};
  Matrix<T> m(rows, cols);
  const T keep = static_cast<T>(1.0 / (1.0 - rate));
  for (std::size_t i = 0; i < m.size(); ++i)
    m.data()[i] = rng.next_double() < rate ? T(0) : keep;
  return m;
}

}  // namespace

template <typename T>
EncoderParams<T> init_params(const EncoderConfig& cfg,
                             const std::vector<std::size_t>& group_dims,
                             std::size_t iterations, std::uint64_t seed) {
  EncoderParams<T> p = params_shell<T>(cfg, group_dims, iterations);
  Rng rng(derive_seed(seed, "encoder-init"));
  for (GroupParams<T>& gp : p.groups) {
    fill_uniform(gp.conv_w, iterations, rng);
    for (std::size_t l = 0; l < gp.mlp_w.size(); ++l)
      fill_uniform(gp.mlp_w[l], gp.mlp_w[l].rows(), rng);
  }
  for (std::size_t l = 0; l < p.fusion_w.size(); ++l)
    fill_uniform(p.fusion_w[l], p.fusion_w[l].rows(), rng);
  return p;
}

template <typename T>
DropoutMasks<T> make_dropout_masks(const EncoderConfig& cfg,
                                   const std::vector<std::size_t>& group_dims,
                                   std::size_t groups, std::size_t iterations,
                                   std::size_t batch, Rng& rng) {
  check_config(cfg);
  if (group_dims.size() != groups)
    throw ConfigError("make_dropout_masks: group_dims size mismatch");
  DropoutMasks<T> m;
  m.input.resize(groups);
  m.group_hidden.resize(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t k = 0; k < iterations; ++k)
      m.input[g].push_back(
          sample_mask<T>(batch, group_dims[g], cfg.dropout_input, rng));
    for (int l = 0; l < cfg.group_mlp_layers - 1; ++l)
      m.group_hidden[g].push_back(
          sample_mask<T>(batch, cfg.hidden_dim, cfg.dropout_hidden, rng));
  }
  for (int l = 0; l < cfg.fusion_mlp_layers - 1; ++l)
    m.fusion_hidden.push_back(
        sample_mask<T>(batch, cfg.hidden_dim, cfg.dropout_hidden, rng));
  return m;
}

template <typename T>
std::vector<Matrix<T>> conv1d_over_iterations(const std::vector<Matrix<T>>& slabs,
                                              const Matrix<T>& conv_w,
                                              const std::vector<T>& conv_b) {
  if (slabs.empty()) throw ConfigError("conv1d: no slabs");
  if (conv_w.rows() != slabs.size())
    throw ConfigError("conv1d: weight rows must equal slab count");
  if (conv_w.cols() != conv_b.size())
    throw ConfigError("conv1d: bias size must equal channel count");
  for (const Matrix<T>& s : slabs)
    check_same_shape(s.rows(), s.cols(), slabs[0].rows(), slabs[0].cols(),
                     "conv1d slabs");
  std::vector<Matrix<T>> out;
  for (std::size_t c = 0; c < conv_w.cols(); ++c) {
    Matrix<T> m(slabs[0].rows(), slabs[0].cols(), conv_b[c]);
    for (std::size_t k = 0; k < slabs.size(); ++k) {
      const T w = conv_w(k, c);
      for (std::size_t i = 0; i < m.size(); ++i)
        m.data()[i] += w * slabs[k].data()[i];
    }
    out.push_back(std::move(m));
  }
  return out;
}

template <typename T>
Matrix<T> group_encode(const std::vector<Matrix<T>>& slabs,
                       const GroupParams<T>& gp, const EncoderConfig& cfg) {
  check_config(cfg);
  if (slabs.size() != gp.conv_w.rows())
    throw ConfigError("group_encode: slab count does not match conv weights");
  Matrix<T> z = conv_forward<T>(slabs, gp, nullptr);
  std::vector<Matrix<T>> inputs, acts;
  return mlp_forward<T>(std::move(z), gp.mlp_w, gp.mlp_b, nullptr, inputs, acts);
}

template <typename T>
Matrix<T> fuse_and_classify(const std::vector<Matrix<T>>& group_reprs,
                            const EncoderParams<T>& params,
                            const EncoderConfig& cfg) {
  check_config(cfg);
  if (group_reprs.size() != params.groups.size())
    throw ConfigError("fuse_and_classify: group count mismatch");
  const std::size_t batch = group_reprs.empty() ? 0 : group_reprs[0].rows();
  const std::size_t d = cfg.hidden_dim;
  Matrix<T> x(batch, group_reprs.size() * d);
  for (std::size_t g = 0; g < group_reprs.size(); ++g) {
    check_same_shape(group_reprs[g].rows(), group_reprs[g].cols(), batch, d,
                     "fuse_and_classify reprs");
    for (std::size_t b = 0; b < batch; ++b) {
      const T* src = group_reprs[g].row(b);
      T* dst = x.row(b) + g * d;
      for (std::size_t j = 0; j < d; ++j) dst[j] = src[j];
    }
  }
  std::vector<Matrix<T>> inputs, acts;
  return mlp_forward<T>(std::move(x), params.fusion_w, params.fusion_b, nullptr,
                        inputs, acts);
}

template <typename T>
Matrix<T> forward_logits(const EncoderParams<T>& params,
                         const std::vector<std::vector<Matrix<T>>>& slabs_by_group,
                         const EncoderConfig& cfg) {
  return forward_trace<T>(params, slabs_by_group, cfg, nullptr).logits;
}

template <typename T>
T loss_with_masks(const EncoderParams<T>& params,
                  const std::vector<std::vector<Matrix<T>>>& slabs_by_group,
                  const std::vector<std::uint32_t>& labels,
                  const EncoderConfig& cfg, const DropoutMasks<T>& masks) {
  Trace<T> trace = forward_trace(params, slabs_by_group, cfg, &masks);
  return softmax_ce_inplace(trace.logits, labels);
}

template <typename T>
GradResult<T> loss_and_grads_with_masks(
    const EncoderParams<T>& params,
    const std::vector<std::vector<Matrix<T>>>& slabs_by_group,
    const std::vector<std::uint32_t>& labels, const EncoderConfig& cfg,
    const DropoutMasks<T>& masks) {
  Trace<T> trace = forward_trace(params, slabs_by_group, cfg, &masks);
  GradResult<T> result;
  result.grads = params;
  for_each_tensor(result.grads, [](T* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) data[i] = T(0);
  });
  result.loss = softmax_ce_inplace(trace.logits, labels);

  const std::size_t batch = trace.logits.rows();
  const std::size_t d = cfg.hidden_dim;
  Matrix<T> dout = trace.logits;  // softmax probabilities after the CE pass
  const T invb = T(1) / static_cast<T>(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    T* row = dout.row(b);
    row[labels[b]] -= T(1);
    for (std::size_t j = 0; j < dout.cols(); ++j) row[j] *= invb;
  }

  Matrix<T> dx = mlp_backward(params.fusion_w, trace.fusion_inputs,
                              trace.fusion_acts, &masks.fusion_hidden,
                              std::move(dout), result.grads.fusion_w,
                              result.grads.fusion_b);

  for (std::size_t g = 0; g < params.groups.size(); ++g) {
    Matrix<T> drepr(batch, d);
    for (std::size_t b = 0; b < batch; ++b) {
      const T* src = dx.row(b) + g * d;
      T* dst = drepr.row(b);
      for (std::size_t j = 0; j < d; ++j) dst[j] = src[j];
    }
    const GroupParams<T>& gp = params.groups[g];
    GroupParams<T>& gg = result.grads.groups[g];
    const std::vector<Matrix<T>>* hid_masks =
        g < masks.group_hidden.size() ? &masks.group_hidden[g] : nullptr;
    const std::vector<Matrix<T>>* in_masks =
        g < masks.input.size() ? &masks.input[g] : nullptr;
    Matrix<T> dz = mlp_backward(gp.mlp_w, trace.groups[g].inputs,
                                trace.groups[g].acts, hid_masks,
                                std::move(drepr), gg.mlp_w, gg.mlp_b);
    conv_backward(slabs_by_group[g], in_masks, dz, gg.conv_w, gg.conv_b);
  }
  return result;
}

template <typename T>
GradResult<T> loss_and_grads(
    const EncoderParams<T>& params,
    const std::vector<std::vector<Matrix<T>>>& slabs_by_group,
    const std::vector<std::uint32_t>& labels, const EncoderConfig& cfg,
    Rng& rng) {
  check_slabs(slabs_by_group, params);
  std::vector<std::size_t> group_dims;
  for (const auto& slabs : slabs_by_group) group_dims.push_back(slabs[0].cols());
  DropoutMasks<T> masks = make_dropout_masks<T>(
      cfg, group_dims, params.groups.size(), params.iterations(),
      slabs_by_group[0][0].rows(), rng);
  return loss_and_grads_with_masks(params, slabs_by_group, labels, cfg, masks);
}

// --- Checkpoints -------------------------------------------------------------

namespace {
constexpr std::uint32_t kCheckpointVersion = 1;
}

void save_checkpoint(const std::string& path, const EncoderParams<float>& params,
                     const CheckpointMeta& meta) {
  nlohmann::json j;
  j["version"] = kCheckpointVersion;
  j["config"] = {{"hidden_dim", meta.cfg.hidden_dim},
                 {"conv_channels", meta.cfg.conv_channels},
                 {"group_mlp_layers", meta.cfg.group_mlp_layers},
                 {"fusion_mlp_layers", meta.cfg.fusion_mlp_layers},
                 {"dropout_input", meta.cfg.dropout_input},
                 {"dropout_hidden", meta.cfg.dropout_hidden},
                 {"num_classes", meta.cfg.num_classes}};
  j["group_relations"] = meta.group_relations;
  j["group_dims"] = meta.group_dims;
  j["iterations"] = meta.iterations;
  j["manifest_hash"] = meta.manifest_hash;
  j["param_count"] = param_count(params);
  const std::string header = j.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("save_checkpoint: cannot open '" + path + "'");
  binio::write_u32(os, static_cast<std::uint32_t>(header.size()));
  binio::write_bytes(os, header.data(), header.size());
  for_each_tensor(params, [&](const float* data, std::size_t n) {
    binio::write_f32_array(os, data, n);
  });
  if (!os) throw FormatError("save_checkpoint: write failed for '" + path + "'");
}

std::pair<EncoderParams<float>, CheckpointMeta> load_checkpoint(
    const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("load_checkpoint: cannot open '" + path + "'");
  const std::uint32_t header_len = binio::read_u32(is, "checkpoint header length");
  const std::string header =
      binio::read_string(is, header_len, "checkpoint header");
  CheckpointMeta meta;
  std::size_t declared = 0;
  try {
    nlohmann::json j = nlohmann::json::parse(header);
    if (j.at("version").get<std::uint32_t>() != kCheckpointVersion)
      throw FormatError("load_checkpoint: unsupported version");
    const auto& jc = j.at("config");
    meta.cfg.hidden_dim = jc.at("hidden_dim").get<std::size_t>();
    meta.cfg.conv_channels = jc.at("conv_channels").get<std::size_t>();
    meta.cfg.group_mlp_layers = jc.at("group_mlp_layers").get<int>();
    meta.cfg.fusion_mlp_layers = jc.at("fusion_mlp_layers").get<int>();
    meta.cfg.dropout_input = jc.at("dropout_input").get<double>();
    meta.cfg.dropout_hidden = jc.at("dropout_hidden").get<double>();
    meta.cfg.num_classes = jc.at("num_classes").get<std::size_t>();
    meta.group_relations =
        j.at("group_relations").get<std::vector<std::string>>();
    meta.group_dims = j.at("group_dims").get<std::vector<std::size_t>>();
    meta.iterations = j.at("iterations").get<std::size_t>();
    meta.manifest_hash = j.at("manifest_hash").get<std::string>();
    declared = j.at("param_count").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("load_checkpoint: malformed header: ") +
                      e.what());
  } catch (const FormatError&) {
    throw;
  }
  EncoderParams<float> params =
      params_shell<float>(meta.cfg, meta.group_dims, meta.iterations);
  if (param_count(params) != declared)
    throw FormatError("load_checkpoint: header shapes disagree with count");
  for_each_tensor(params, [&](float* data, std::size_t n) {
    binio::read_f32_array(is, data, n, "checkpoint payload");
  });
  char extra;
  is.read(&extra, 1);
  if (is.gcount() != 0)
    throw FormatError("load_checkpoint: trailing bytes after parameters");
  return {std::move(params), std::move(meta)};
}

// --- Explicit instantiations --------------------------------------------------

#define RPHGNN_INSTANTIATE(T)                                                   \
  template EncoderParams<T> init_params<T>(const EncoderConfig&,               \
                                           const std::vector<std::size_t>&,    \
                                           std::size_t, std::uint64_t);        \
  template DropoutMasks<T> make_dropout_masks<T>(                              \
      const EncoderConfig&, const std::vector<std::size_t>&, std::size_t,      \
      std::size_t, std::size_t, Rng&);                                         \
  template std::vector<Matrix<T>> conv1d_over_iterations<T>(                   \
      const std::vector<Matrix<T>>&, const Matrix<T>&, const std::vector<T>&); \
  template Matrix<T> group_encode<T>(const std::vector<Matrix<T>>&,            \
                                     const GroupParams<T>&,                    \
                                     const EncoderConfig&);                    \
  template Matrix<T> fuse_and_classify<T>(const std::vector<Matrix<T>>&,       \
                                          const EncoderParams<T>&,             \
                                          const EncoderConfig&);               \
  template Matrix<T> forward_logits<T>(                                        \
      const EncoderParams<T>&, const std::vector<std::vector<Matrix<T>>>&,     \
      const EncoderConfig&);                                                   \
  template T loss_with_masks<T>(                                               \
      const EncoderParams<T>&, const std::vector<std::vector<Matrix<T>>>&,     \
      const std::vector<std::uint32_t>&, const EncoderConfig&,                 \
      const DropoutMasks<T>&);                                                 \
  template GradResult<T> loss_and_grads_with_masks<T>(                         \
      const EncoderParams<T>&, const std::vector<std::vector<Matrix<T>>>&,     \
      const std::vector<std::uint32_t>&, const EncoderConfig&,                 \
      const DropoutMasks<T>&);                                                 \
  template GradResult<T> loss_and_grads<T>(                                    \
      const EncoderParams<T>&, const std::vector<std::vector<Matrix<T>>>&,     \
      const std::vector<std::uint32_t>&, const EncoderConfig&, Rng&);

RPHGNN_INSTANTIATE(float)
RPHGNN_INSTANTIATE(double)
#undef RPHGNN_INSTANTIATE

}  // namespace rphgnn
