#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "rphgnn/encoder.hpp"
#include "rphgnn/precompute.hpp"
#include "rphgnn/trainer.hpp"

namespace rphgnn {

// The full configuration of a pipeline run.  Its hash is embedded in every
// artifact (archive, checkpoint, metrics, history) so stages can verify they
// belong together.  The output directory is deliberately not part of the
// hashed content: reruns of the same manifest into different directories
// must produce bit-identical artifacts.
struct RunManifest {
  std::string graph_hash;
  Scheme scheme = Scheme::even_odd;
  int iterations = 2;
  RpStrategy rp_strategy = RpStrategy::sparse;
  double p_sp = 2.0 / 3.0;
  std::size_t embedding_dim = 64;   // random embeddings for featureless types
  std::size_t relation_cap = 512;
  EncoderConfig encoder;            // num_classes is data-derived, not hashed
  double lr = 3e-3;
  std::size_t batch_size = 10000;
  int patience = 10;
  int max_epochs = 100;
  std::uint64_t seed = 1;
};

nlohmann::json manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);  // ConfigError on junk
std::string manifest_hash(const RunManifest& m);

// Seed fan-out: every random consumer gets an independent stream.
std::uint64_t rp_seed(const RunManifest& m);
std::uint64_t embedding_seed(const RunManifest& m, int vertex_type_id);
std::uint64_t train_seed(const RunManifest& m);

}  // namespace rphgnn
