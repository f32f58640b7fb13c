#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rphgnn/hetgraph.hpp"
#include "rphgnn/trainer.hpp"

namespace rphgnn {

// On-disk graph directory layout:
//   graph.json      manifest: vertex types (count, optional feature file),
//                   edge types (src, name, dst, file, self_reverse), target
//   edges/*.bin     little-endian u32 (src, dst) pairs
//   features/*.bin  u32 rows, u32 cols header, then row-major f32
//   labels.bin      u32 per target vertex, 0xFFFFFFFF = unlabeled (optional)
//   split.json      {"train": [...], "valid": [...], "test": [...]} (optional)

struct LoadedGraph {
  HeteroGraph graph;
  std::string target;      // target vertex type name
  std::string graph_hash;  // content hash over manifest + binary payloads
};

LoadedGraph load_graph_dir(const std::string& dir);

void save_graph_dir(const std::string& dir, const HeteroGraph& g,
                    const std::string& target,
                    const std::vector<std::uint32_t>* labels = nullptr,
                    const Split* split = nullptr);

bool has_labels(const std::string& dir);
std::vector<std::uint32_t> load_labels(const std::string& dir,
                                       std::size_t expected_count);
Split load_split(const std::string& dir);

// Same content hash that load_graph_dir reports; usable without building.
std::string graph_dir_hash(const std::string& dir);

std::string hash_hex(std::uint64_t h);

}  // namespace rphgnn
