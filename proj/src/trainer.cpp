#include "rphgnn/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "rphgnn/errors.hpp"

namespace rphgnn {

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

class Adam {
 public:
  Adam(std::size_t n, double lr)
      : lr_(static_cast<float>(lr)), m_(n, 0.0f), v_(n, 0.0f) {}

  void step(EncoderParams<float>& params, const EncoderParams<float>& grads) {
    ++t_;
    const float b1 = 0.9f, b2 = 0.999f, eps = 1e-8f;
    const float bc1 = 1.0f - std::pow(b1, static_cast<float>(t_));
    const float bc2 = 1.0f - std::pow(b2, static_cast<float>(t_));
    std::vector<std::pair<float*, std::size_t>> pt;
    for_each_tensor(params, [&](float* d, std::size_t n) { pt.push_back({d, n}); });
    std::vector<std::pair<const float*, std::size_t>> gt;
    for_each_tensor(grads,
                    [&](const float* d, std::size_t n) { gt.push_back({d, n}); });
    if (pt.size() != gt.size()) throw ConfigError("adam: parameter layout mismatch");
    std::size_t off = 0;
    for (std::size_t i = 0; i < pt.size(); ++i) {
      if (pt[i].second != gt[i].second)
        throw ConfigError("adam: tensor shape mismatch");
      float* p = pt[i].first;
      const float* g = gt[i].first;
      for (std::size_t j = 0; j < pt[i].second; ++j, ++off) {
        m_[off] = b1 * m_[off] + (1.0f - b1) * g[j];
        v_[off] = b2 * v_[off] + (1.0f - b2) * g[j] * g[j];
        const float mhat = m_[off] / bc1;
        const float vhat = v_[off] / bc2;
        p[j] -= lr_ * mhat / (std::sqrt(vhat) + eps);
      }
    }
    if (off != m_.size()) throw ConfigError("adam: parameter count mismatch");
  }

 private:
  float lr_;
  long t_ = 0;
  std::vector<float> m_, v_;
};

void check_groups(const std::vector<GroupTensor>& groups) {
  if (groups.empty()) throw ConfigError("trainer: no group tensors");
  const std::size_t k = groups.front().slabs.size();
  const std::size_t n = groups.front().slabs.front().rows();
  for (const GroupTensor& g : groups) {
    if (g.slabs.size() != k)
      throw ConfigError("trainer: inconsistent slab counts across groups");
    for (const Matrix<float>& s : g.slabs)
      if (s.rows() != n)
        throw ConfigError("trainer: inconsistent row counts across slabs");
  }
}

std::vector<std::size_t> dims_of(const std::vector<GroupTensor>& groups) {
  std::vector<std::size_t> dims;
  for (const GroupTensor& g : groups) dims.push_back(g.slabs.front().cols());
  return dims;
}

void check_indices(const std::vector<std::uint32_t>& indices,
                   const std::vector<std::uint32_t>& labels,
                   std::size_t rows, std::size_t num_classes,
                   const char* what) {
  for (std::uint32_t i : indices) {
    if (i >= rows)
      throw ConfigError(std::string(what) + ": index out of range");
    if (labels[i] == kUnlabeled)
      throw ConfigError(std::string(what) + ": index " + std::to_string(i) +
                        " is unlabeled");
    if (labels[i] >= num_classes)
      throw ConfigError(std::string(what) + ": label out of range");
  }
}

}  // namespace

Metrics compute_metrics(const std::vector<std::uint32_t>& predictions,
                        const std::vector<std::uint32_t>& labels,
                        std::size_t num_classes) {
  if (predictions.size() != labels.size())
    throw ConfigError("compute_metrics: size mismatch");
  if (predictions.empty()) throw ConfigError("compute_metrics: empty input");
  std::vector<std::size_t> tp(num_classes, 0), fp(num_classes, 0),
      fn(num_classes, 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const std::uint32_t p = predictions[i], y = labels[i];
    if (p >= num_classes || y >= num_classes)
      throw ConfigError("compute_metrics: class id out of range");
    if (p == y) {
      ++tp[p];
      ++correct;
    } else {
      ++fp[p];
      ++fn[y];
    }
  }
  Metrics m;
  m.count = predictions.size();
  m.accuracy = static_cast<double>(correct) / static_cast<double>(m.count);
  std::size_t tp_sum = 0, fp_sum = 0, fn_sum = 0;
  double macro = 0.0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    tp_sum += tp[c];
    fp_sum += fp[c];
    fn_sum += fn[c];
    const double denom = 2.0 * static_cast<double>(tp[c]) +
                         static_cast<double>(fp[c]) + static_cast<double>(fn[c]);
    macro += denom > 0.0 ? 2.0 * static_cast<double>(tp[c]) / denom : 0.0;
  }
  m.macro_f1 = macro / static_cast<double>(num_classes);
  const double micro_denom = 2.0 * static_cast<double>(tp_sum) +
                             static_cast<double>(fp_sum) +
                             static_cast<double>(fn_sum);
  m.micro_f1 = micro_denom > 0.0 ? 2.0 * static_cast<double>(tp_sum) / micro_denom
                                 : 0.0;
  return m;
}

std::vector<std::vector<Matrix<float>>> gather_slabs(
    const std::vector<GroupTensor>& groups,
    const std::vector<std::uint32_t>& indices) {
  std::vector<std::vector<Matrix<float>>> out(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (const Matrix<float>& slab : groups[g].slabs) {
      Matrix<float> b(indices.size(), slab.cols());
      for (std::size_t r = 0; r < indices.size(); ++r) {
        const float* src = slab.row(indices[r]);
        std::copy(src, src + slab.cols(), b.row(r));
      }
      out[g].push_back(std::move(b));
    }
  }
  return out;
}

std::vector<std::uint32_t> predict(const EncoderParams<float>& params,
                                   const std::vector<GroupTensor>& groups,
                                   const std::vector<std::uint32_t>& indices,
                                   const EncoderConfig& cfg) {
  check_groups(groups);
  constexpr std::size_t kChunk = 4096;
  std::vector<std::uint32_t> preds;
  preds.reserve(indices.size());
  for (std::size_t at = 0; at < indices.size(); at += kChunk) {
    const std::size_t n = std::min(kChunk, indices.size() - at);
    std::vector<std::uint32_t> chunk(indices.begin() + at,
                                     indices.begin() + at + n);
    Matrix<float> logits =
        forward_logits(params, gather_slabs(groups, chunk), cfg);
    for (std::size_t b = 0; b < logits.rows(); ++b) {
      const float* row = logits.row(b);
      std::uint32_t best = 0;
      for (std::size_t j = 1; j < logits.cols(); ++j)
        if (row[j] > row[best]) best = static_cast<std::uint32_t>(j);
      preds.push_back(best);
    }
  }
  return preds;
}

Metrics evaluate(const EncoderParams<float>& params,
                 const std::vector<GroupTensor>& groups,
                 const std::vector<std::uint32_t>& labels,
                 const std::vector<std::uint32_t>& indices,
                 const EncoderConfig& cfg) {
  check_groups(groups);
  if (labels.size() != groups.front().slabs.front().rows())
    throw ConfigError("evaluate: label count does not match rows");
  check_indices(indices, labels, labels.size(), cfg.num_classes, "evaluate");
  std::vector<std::uint32_t> preds = predict(params, groups, indices, cfg);
  std::vector<std::uint32_t> truth;
  truth.reserve(indices.size());
  for (std::uint32_t i : indices) truth.push_back(labels[i]);
  return compute_metrics(preds, truth, cfg.num_classes);
}

TrainResult train(const std::vector<GroupTensor>& groups,
                  const std::vector<std::uint32_t>& labels, const Split& split,
                  const EncoderConfig& enc_cfg, const TrainConfig& cfg) {
  check_groups(groups);
  if (cfg.lr < 0.0) throw ConfigError("train: negative learning rate");
  if (cfg.batch_size == 0) throw ConfigError("train: batch_size must be positive");
  if (cfg.patience < 1) throw ConfigError("train: patience must be at least 1");
  if (cfg.max_epochs < 1) throw ConfigError("train: max_epochs must be at least 1");
  if (split.train.empty()) throw ConfigError("train: empty training split");
  if (split.valid.empty()) throw ConfigError("train: empty validation split");
  const std::size_t rows = groups.front().slabs.front().rows();
  if (labels.size() != rows)
    throw ConfigError("train: label count does not match rows");
  check_indices(split.train, labels, rows, enc_cfg.num_classes, "train split");
  check_indices(split.valid, labels, rows, enc_cfg.num_classes, "valid split");

  const std::size_t iterations = groups.front().slabs.size();
  EncoderParams<float> params = init_params<float>(
      enc_cfg, dims_of(groups), iterations, derive_seed(cfg.seed, "init"));
  Adam adam(param_count(params), cfg.lr);
  Rng shuffle_rng(derive_seed(cfg.seed, "shuffle"));
  Rng dropout_rng(derive_seed(cfg.seed, "dropout"));

  TrainResult result;
  result.best_metric = -1.0;
  std::vector<std::uint32_t> order = split.train;
  int stale = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const double t0 = now_seconds();
    // Fisher-Yates with the project RNG keeps epochs reproducible.
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = shuffle_rng.next_below(i);
      std::swap(order[i - 1], order[j]);
    }
    double loss_sum = 0.0;
    for (std::size_t at = 0; at < order.size(); at += cfg.batch_size) {
      const std::size_t n = std::min(cfg.batch_size, order.size() - at);
      std::vector<std::uint32_t> batch(order.begin() + at,
                                       order.begin() + at + n);
      std::vector<std::uint32_t> batch_labels;
      batch_labels.reserve(n);
      for (std::uint32_t i : batch) batch_labels.push_back(labels[i]);
      GradResult<float> step =
          loss_and_grads(params, gather_slabs(groups, batch), batch_labels,
                         enc_cfg, dropout_rng);
      adam.step(params, step.grads);
      loss_sum += static_cast<double>(step.loss) * static_cast<double>(n);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.valid_metric =
        evaluate(params, groups, labels, split.valid, enc_cfg).accuracy;
    rec.seconds = now_seconds() - t0;
    result.history.push_back(rec);

    if (rec.valid_metric > result.best_metric) {
      result.best_metric = rec.valid_metric;
      result.best_epoch = epoch;
      result.best_params = params;
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }
  return result;
}

void write_history_csv(const std::string& path,
                       const std::vector<EpochRecord>& history,
                       const std::string& manifest_hash) {
  std::ofstream os(path);
  if (!os) throw FormatError("write_history_csv: cannot open '" + path + "'");
  os << "# manifest " << manifest_hash << "\n";
  os << "epoch,train_loss,valid_metric,seconds\n";
  char buf[128];
  for (const EpochRecord& r : history) {
    std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f,%.3f\n", r.epoch,
                  r.train_loss, r.valid_metric, r.seconds);
    os << buf;
  }
}

BenchResult bench_epoch_time(const std::vector<GroupTensor>& groups,
                             const EncoderConfig& enc_cfg,
                             const TrainConfig& cfg,
                             const std::vector<int>& iteration_counts,
                             int reps) {
  check_groups(groups);
  if (iteration_counts.empty())
    throw ConfigError("bench_epoch_time: no iteration counts");
  if (reps < 1) throw ConfigError("bench_epoch_time: reps must be positive");
  const std::size_t rows = groups.front().slabs.front().rows();
  const std::size_t available = groups.front().slabs.size();

  std::vector<std::uint32_t> order(rows);
  for (std::size_t i = 0; i < rows; ++i) order[i] = static_cast<std::uint32_t>(i);
  std::vector<std::uint32_t> labels(rows);
  Rng label_rng(derive_seed(cfg.seed, "bench-labels"));
  for (std::size_t i = 0; i < rows; ++i)
    labels[i] =
        static_cast<std::uint32_t>(label_rng.next_below(enc_cfg.num_classes));

  BenchResult result;
  for (int k : iteration_counts) {
    if (k < 1 || static_cast<std::size_t>(k) > available)
      throw ConfigError("bench_epoch_time: iteration count " +
                        std::to_string(k) + " exceeds archived slabs");
    // Same rows and relation groups for every k; only the slab depth varies.
    std::vector<GroupTensor> sliced;
    for (const GroupTensor& g : groups) {
      GroupTensor s;
      s.relation_id = g.relation_id;
      s.relation_compact = g.relation_compact;
      s.slabs.assign(g.slabs.begin(), g.slabs.begin() + k);
      sliced.push_back(std::move(s));
    }
    EncoderParams<float> params =
        init_params<float>(enc_cfg, dims_of(sliced),
                           static_cast<std::size_t>(k),
                           derive_seed(cfg.seed, "bench-init"));
    Adam adam(param_count(params), cfg.lr);
    Rng dropout_rng(derive_seed(cfg.seed, "bench-dropout"));
    double best = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      const double t0 = now_seconds();
      for (std::size_t at = 0; at < order.size(); at += cfg.batch_size) {
        const std::size_t n = std::min(cfg.batch_size, order.size() - at);
        std::vector<std::uint32_t> batch(order.begin() + at,
                                         order.begin() + at + n);
        std::vector<std::uint32_t> batch_labels;
        batch_labels.reserve(n);
        for (std::uint32_t i : batch) batch_labels.push_back(labels[i]);
        GradResult<float> step =
            loss_and_grads(params, gather_slabs(sliced, batch), batch_labels,
                           enc_cfg, dropout_rng);
        adam.step(params, step.grads);
      }
      const double dt = now_seconds() - t0;
      if (rep == 0 || dt < best) best = dt;
    }
    result.rows.push_back({k, best});
  }

  // Least-squares fit seconds ~ intercept + slope * k.
  const double n = static_cast<double>(result.rows.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const BenchRow& r : result.rows) {
    sx += r.iterations;
    sy += r.seconds;
    sxx += static_cast<double>(r.iterations) * r.iterations;
    sxy += r.iterations * r.seconds;
  }
  const double denom = n * sxx - sx * sx;
  result.slope = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
  result.intercept = (sy - result.slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double mean = sy / n;
  for (const BenchRow& r : result.rows) {
    const double fit = result.intercept + result.slope * r.iterations;
    ss_res += (r.seconds - fit) * (r.seconds - fit);
    ss_tot += (r.seconds - mean) * (r.seconds - mean);
  }
  result.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return result;
}

}  // namespace rphgnn
