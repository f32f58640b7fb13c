#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rphgnn/hetgraph.hpp"
#include "rphgnn/relations.hpp"
#include "rphgnn/squashing.hpp"

namespace rphgnn {

struct PrecomputeConfig {
  Scheme scheme = Scheme::even_odd;
  int iterations = 2;  // K >= 1
  RpConfig rp;
  int target = 0;               // vertex type id
  std::size_t relation_cap = 512;  // guards enumerated (two_hop) schemas
};

// Archived collections for one target relation: slabs[k-1] holds the
// iteration-k collection, pre-squash, so the trainable encoder decides how
// to merge.  All slabs share rows (target count) and columns (the relation's
// start-type dimension).
struct GroupTensor {
  std::string relation_id;       // full rendering; canonical identity
  std::string relation_compact;  // vertex-type sequence
  std::vector<Matrix<float>> slabs;
};

struct PrecomputeResult {
  std::vector<GroupTensor> groups;
  std::vector<std::string> warnings;  // e.g. types with no incoming relations
};

// Runs K collection+squash rounds over every vertex type, archiving the
// target type's raw collections.  Requires every vertex type to carry
// features (attach random embeddings first for featureless types).
PrecomputeResult run_precompute(const HeteroGraph& g,
                                const PrecomputeConfig& cfg);

// --- Archive -----------------------------------------------------------------
// Layout: magic "RPHG", u32 version, u32 header length, JSON header
// (provenance hashes, scheme, iterations, rp config, per-group shapes),
// then for each group in order its K slabs as row-major little-endian f32.

struct ArchiveMeta {
  std::string manifest_hash;
  std::string graph_hash;
  Scheme scheme = Scheme::even_odd;
  int iterations = 0;
  std::string target;
  RpConfig rp;
};

struct Archive {
  ArchiveMeta meta;
  std::vector<GroupTensor> groups;
};

void save_groups(const std::string& path, const std::vector<GroupTensor>& groups,
                 const ArchiveMeta& meta);

// FormatError on bad magic/version, malformed header, or any size mismatch
// between the header and the payload.
Archive load_groups(const std::string& path);

}  // namespace rphgnn
