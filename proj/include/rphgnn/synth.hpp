#pragma once

#include <cstdint>

#include "rphgnn/hetgraph.hpp"
#include "rphgnn/trainer.hpp"

namespace rphgnn {

// Synthetic benchmark generator.  Four vertex types:
//   item  target; features = signal * class centroid + N(0,1) noise
//   hub   featureless intermediate; items prefer same-class hubs, so the
//         even relation item -> hub -> item averages same-class features
//   tag   random features, class-independent edges (noise)
//   ctx   random features, class-independent edges (noise)
// signal = 0 removes both the feature and the structure signal: labels
// become unlearnable and trained accuracy sits near 1/classes.
struct SynthConfig {
  std::size_t targets = 2000;
  std::size_t classes = 5;
  std::size_t hubs = 150;
  std::size_t tags = 300;
  std::size_t ctxs = 400;
  std::size_t item_dim = 32;
  std::size_t tag_dim = 16;
  std::size_t ctx_dim = 8;
  std::size_t hubs_per_item = 3;
  std::size_t tags_per_item = 2;
  std::size_t items_per_ctx = 3;
  double signal = 1.0;  // in [0, 1]
  std::uint64_t seed = 7;
};

struct SynthData {
  HeteroGraph graph;
  std::string target = "item";
  std::vector<std::uint32_t> labels;
  Split split;  // 50% train / 25% valid / 25% test
};

SynthData make_synth(const SynthConfig& cfg);

// Writes the dataset as a graph directory (including labels.bin, split.json).
void write_synth(const std::string& dir, const SynthConfig& cfg);

}  // namespace rphgnn
