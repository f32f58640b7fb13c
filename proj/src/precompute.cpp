#include "rphgnn/precompute.hpp"

#include <fstream>

#include "json.hpp"
#include "rphgnn/binio.hpp"
#include "rphgnn/errors.hpp"
#include "rphgnn/propagation.hpp"

namespace rphgnn {

PrecomputeResult run_precompute(const HeteroGraph& g,
                                const PrecomputeConfig& cfg) {
  if (cfg.iterations < 1)
    throw ConfigError("run_precompute: iterations must be at least 1");
  if (cfg.target < 0 ||
      static_cast<std::size_t>(cfg.target) >= g.vertex_types.size())
    throw ConfigError("run_precompute: unknown target vertex type");
  for (std::size_t t = 0; t < g.vertex_types.size(); ++t) {
    if (!g.has_features(static_cast<int>(t)))
      throw ConfigError("run_precompute: vertex type '" +
                        g.vertex_types[t].name +
                        "' has no feature table; attach one (random "
                        "embeddings for featureless types) before running");
  }

  const std::size_t nt = g.vertex_types.size();
  std::vector<std::vector<Relation>> rels(nt);
  for (std::size_t t = 0; t < nt; ++t)
    rels[t] =
        scheme_relations(g, static_cast<int>(t), cfg.scheme, cfg.relation_cap);

  PrecomputeResult result;
  for (std::size_t t = 0; t < nt; ++t) {
    if (rels[t].empty())
      result.warnings.push_back("vertex type '" + g.vertex_types[t].name +
                                "' has no incoming relations; its state "
                                "stays a zero matrix");
  }

  for (const Relation& r : rels[cfg.target]) {
    GroupTensor gt;
    gt.relation_id = render_relation(g, r);
    gt.relation_compact = render_relation_compact(g, r);
    gt.slabs.reserve(static_cast<std::size_t>(cfg.iterations));
    result.groups.push_back(std::move(gt));
  }

  // States start as raw features and keep their own dimensionality: squash
  // projects every relation back to the owning type's width.
  std::vector<Matrix<float>> states = g.features;

  for (int k = 1; k <= cfg.iterations; ++k) {
    // Collect for every type against iteration k-1 states, then update all
    // states at once.
    std::vector<std::vector<CollectedNeighborInfo>> collected(nt);
    for (std::size_t t = 0; t < nt; ++t) {
      collected[t].reserve(rels[t].size());
      for (const Relation& r : rels[t]) {
        CollectedNeighborInfo info;
        info.relation = r;
        info.values = collect_relation(g, r, states);
        collected[t].push_back(std::move(info));
      }
    }
    for (std::size_t i = 0; i < result.groups.size(); ++i)
      result.groups[i].slabs.push_back(
          collected[static_cast<std::size_t>(cfg.target)][i].values);
    for (std::size_t t = 0; t < nt; ++t) {
      states[t] = squash(g, collected[t], g.vertex_types[t].count,
                         g.features[t].cols(), cfg.rp, k);
    }
  }
  return result;
}

// --- Archive -----------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'R', 'P', 'H', 'G'};
constexpr std::uint32_t kVersion = 1;

nlohmann::json meta_to_json(const ArchiveMeta& meta,
                            const std::vector<GroupTensor>& groups) {
  nlohmann::json j;
  j["manifest_hash"] = meta.manifest_hash;
  j["graph_hash"] = meta.graph_hash;
  j["scheme"] = scheme_to_string(meta.scheme);
  j["iterations"] = meta.iterations;
  j["target"] = meta.target;
  j["rp"] = {{"strategy", rp_strategy_to_string(meta.rp.strategy)},
             {"p_sp", meta.rp.p_sp},
             {"base_seed", meta.rp.base_seed}};
  j["groups"] = nlohmann::json::array();
  for (const GroupTensor& gt : groups) {
    if (gt.slabs.size() != static_cast<std::size_t>(meta.iterations))
      throw ConfigError("save_groups: group '" + gt.relation_id + "' has " +
                        std::to_string(gt.slabs.size()) + " slabs, expected " +
                        std::to_string(meta.iterations));
    for (const Matrix<float>& s : gt.slabs) {
      if (s.rows() != gt.slabs.front().rows() ||
          s.cols() != gt.slabs.front().cols())
        throw ConfigError("save_groups: ragged slabs in group '" +
                          gt.relation_id + "'");
    }
    j["groups"].push_back({{"relation", gt.relation_id},
                           {"compact", gt.relation_compact},
                           {"rows", gt.slabs.front().rows()},
                           {"cols", gt.slabs.front().cols()}});
  }
  return j;
}

}  // namespace

void save_groups(const std::string& path, const std::vector<GroupTensor>& groups,
                 const ArchiveMeta& meta) {
  if (groups.empty()) throw ConfigError("save_groups: no groups to save");
  const std::string header = meta_to_json(meta, groups).dump();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("save_groups: cannot open '" + path + "'");
  binio::write_bytes(os, kMagic, 4);
  binio::write_u32(os, kVersion);
  binio::write_u32(os, static_cast<std::uint32_t>(header.size()));
  binio::write_bytes(os, header.data(), header.size());
  for (const GroupTensor& gt : groups)
    for (const Matrix<float>& s : gt.slabs)
      binio::write_f32_array(os, s.data(), s.size());
  if (!os) throw FormatError("save_groups: write failed for '" + path + "'");
}

Archive load_groups(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("load_groups: cannot open '" + path + "'");
  char magic[4];
  binio::read_exact(is, magic, 4, "archive magic");
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError("load_groups: bad magic in '" + path + "'");
  const std::uint32_t version = binio::read_u32(is, "archive version");
  if (version != kVersion)
    throw FormatError("load_groups: unsupported archive version " +
                      std::to_string(version));
  const std::uint32_t header_len = binio::read_u32(is, "archive header length");
  const std::string header = binio::read_string(is, header_len, "archive header");

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("load_groups: malformed header: ") + e.what());
  }

  Archive archive;
  try {
    archive.meta.manifest_hash = j.at("manifest_hash").get<std::string>();
    archive.meta.graph_hash = j.at("graph_hash").get<std::string>();
    archive.meta.scheme = scheme_from_string(j.at("scheme").get<std::string>());
    archive.meta.iterations = j.at("iterations").get<int>();
    archive.meta.target = j.at("target").get<std::string>();
    archive.meta.rp.strategy =
        rp_strategy_from_string(j.at("rp").at("strategy").get<std::string>());
    archive.meta.rp.p_sp = j.at("rp").at("p_sp").get<double>();
    archive.meta.rp.base_seed = j.at("rp").at("base_seed").get<std::uint64_t>();
    if (archive.meta.iterations < 1)
      throw FormatError("load_groups: non-positive iteration count");
    for (const auto& jg : j.at("groups")) {
      GroupTensor gt;
      gt.relation_id = jg.at("relation").get<std::string>();
      gt.relation_compact = jg.at("compact").get<std::string>();
      const auto rows = jg.at("rows").get<std::size_t>();
      const auto cols = jg.at("cols").get<std::size_t>();
      for (int k = 0; k < archive.meta.iterations; ++k)
        gt.slabs.emplace_back(rows, cols);
      archive.groups.push_back(std::move(gt));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("load_groups: malformed header: ") + e.what());
  }
  if (archive.groups.empty())
    throw FormatError("load_groups: header declares no groups");

  for (GroupTensor& gt : archive.groups)
    for (Matrix<float>& s : gt.slabs)
      binio::read_f32_array(is, s.data(), s.size(), "archive payload");

  // The payload must end exactly where the header said it would.
  char extra;
  is.read(&extra, 1);
  if (is.gcount() != 0)
    throw FormatError("load_groups: trailing bytes after declared payload");
  return archive;
}

}  // namespace rphgnn
