#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rphgnn/encoder.hpp"
#include "rphgnn/precompute.hpp"

namespace rphgnn {

inline constexpr std::uint32_t kUnlabeled = 0xFFFFFFFFu;

struct TrainConfig {
  double lr = 3e-3;
  std::size_t batch_size = 10000;
  int patience = 10;    // epochs without validation improvement before stopping
  int max_epochs = 100;
  std::uint64_t seed = 0;
};

struct Split {
  std::vector<std::uint32_t> train, valid, test;
};

struct Metrics {
  double accuracy = 0.0;
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  std::size_t count = 0;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double valid_metric = 0.0;
  double seconds = 0.0;
};

struct TrainResult {
  EncoderParams<float> best_params;
  int best_epoch = 0;
  double best_metric = 0.0;
  std::vector<EpochRecord> history;
};

// Confusion-matrix metrics over all classes 0..num_classes-1; macro-F1 is the
// unweighted mean of per-class F1 (absent classes contribute 0), micro-F1
// equals accuracy for single-label classification.
Metrics compute_metrics(const std::vector<std::uint32_t>& predictions,
                        const std::vector<std::uint32_t>& labels,
                        std::size_t num_classes);

// Gathers the listed rows of every group slab into a batch tensor.
std::vector<std::vector<Matrix<float>>> gather_slabs(
    const std::vector<GroupTensor>& groups,
    const std::vector<std::uint32_t>& indices);

// Evaluation-mode class predictions for the listed rows (argmax, lowest
// index on ties), computed in chunks.
std::vector<std::uint32_t> predict(const EncoderParams<float>& params,
                                   const std::vector<GroupTensor>& groups,
                                   const std::vector<std::uint32_t>& indices,
                                   const EncoderConfig& cfg);

Metrics evaluate(const EncoderParams<float>& params,
                 const std::vector<GroupTensor>& groups,
                 const std::vector<std::uint32_t>& labels,
                 const std::vector<std::uint32_t>& indices,
                 const EncoderConfig& cfg);

// Mini-batch Adam training with validation-improvement checkpointing and
// patience-based early stopping.  Deterministic in cfg.seed.
TrainResult train(const std::vector<GroupTensor>& groups,
                  const std::vector<std::uint32_t>& labels, const Split& split,
                  const EncoderConfig& enc_cfg, const TrainConfig& cfg);

void write_history_csv(const std::string& path,
                       const std::vector<EpochRecord>& history,
                       const std::string& manifest_hash);

struct BenchRow {
  int iterations = 0;
  double seconds = 0.0;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Times one full training epoch (forward + backward + update over all
// batches) for each requested iteration count, using the first k slabs of
// every group; reports the min over reps and a linear fit seconds ~ a + b*k.
BenchResult bench_epoch_time(const std::vector<GroupTensor>& groups,
                             const EncoderConfig& enc_cfg,
                             const TrainConfig& cfg,
                             const std::vector<int>& iteration_counts,
                             int reps = 3);

}  // namespace rphgnn
