#include <algorithm>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "rphgnn/errors.hpp"
#include "rphgnn/precompute.hpp"
#include "rphgnn/rng.hpp"
#include "support/graphs.hpp"
#include "support/oracles.hpp"

using namespace rphgnn;
namespace fs = std::filesystem;

namespace {

HeteroGraph featured_academic(std::uint64_t seed) {
  HeteroGraph g = testsupport::academic_graph();
  testsupport::attach_all_features(g, seed);
  return g;
}

PrecomputeConfig basic_config(const HeteroGraph& g, Scheme scheme, int k,
                              std::uint64_t seed) {
  PrecomputeConfig cfg;
  cfg.scheme = scheme;
  cfg.iterations = k;
  cfg.target = g.vertex_type_id("p") >= 0 ? g.vertex_type_id("p") : 0;
  cfg.rp.base_seed = seed;
  return cfg;
}

fs::path temp_file(const char* name) {
  return fs::temp_directory_path() / name;
}

std::vector<char> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::vector<char>((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
}

void write_bytes(const fs::path& p, const std::vector<char>& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("first-iteration slabs equal the oracle on raw features") {
  const HeteroGraph g = featured_academic(3);
  const PrecomputeConfig cfg = basic_config(g, Scheme::even_odd, 1, 5);
  const PrecomputeResult res = run_precompute(g, cfg);
  const auto states = testsupport::features_as_double(g);
  const auto rels = scheme_relations(g, cfg.target, cfg.scheme);
  REQUIRE(res.groups.size() == rels.size());
  for (std::size_t i = 0; i < rels.size(); ++i) {
    CHECK(res.groups[i].relation_id == render_relation(g, rels[i]));
    CHECK(res.groups[i].relation_compact ==
          render_relation_compact(g, rels[i]));
    REQUIRE(res.groups[i].slabs.size() == 1);
    const Matrix<double> want = oracle_aggregate(g, rels[i], states);
    CHECK(testsupport::max_abs_diff(res.groups[i].slabs[0], want) <= 1e-5);
  }
}

TEST_CASE("the full loop tracks the 64-bit oracle within 1e-4") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const HeteroGraph g = testsupport::random_graph(seed, 10);
    PrecomputeConfig cfg;
    cfg.scheme = Scheme::even_odd;
    cfg.iterations = 3;
    cfg.target = static_cast<int>(seed % g.vertex_types.size());
    cfg.rp.base_seed = derive_seed(seed, "rp");
    const PrecomputeResult res = run_precompute(g, cfg);
    const auto want = testsupport::precompute_oracle(g, cfg);
    REQUIRE(res.groups.size() == want.size());
    for (std::size_t gi = 0; gi < want.size(); ++gi) {
      REQUIRE(res.groups[gi].slabs.size() == want[gi].size());
      for (std::size_t k = 0; k < want[gi].size(); ++k)
        CHECK(testsupport::max_abs_diff(res.groups[gi].slabs[k],
                                        want[gi][k]) <= 1e-4);
    }
  }
}

TEST_CASE("slab shapes follow the start type and stay fixed across iterations") {
  const HeteroGraph g = featured_academic(7);
  const PrecomputeConfig cfg = basic_config(g, Scheme::even_odd, 3, 9);
  const PrecomputeResult res = run_precompute(g, cfg);
  const auto rels = scheme_relations(g, cfg.target, cfg.scheme);
  for (std::size_t i = 0; i < res.groups.size(); ++i) {
    const int start = relation_start_type(g, rels[i]);
    for (const Matrix<float>& slab : res.groups[i].slabs) {
      CHECK(slab.rows() == g.vertex_types[cfg.target].count);
      CHECK(slab.cols() == g.features[start].cols());
    }
  }
}

TEST_CASE("group counts are R for local and 2R for even_odd") {
  const HeteroGraph g = featured_academic(11);
  const std::size_t r =
      run_precompute(g, basic_config(g, Scheme::local, 1, 1)).groups.size();
  const std::size_t r2 =
      run_precompute(g, basic_config(g, Scheme::even_odd, 1, 1)).groups.size();
  CHECK(r == 3);
  CHECK(r2 == 6);
}

TEST_CASE("precompute is deterministic across reruns") {
  const HeteroGraph g = featured_academic(13);
  const PrecomputeConfig cfg = basic_config(g, Scheme::even_odd, 2, 21);
  const PrecomputeResult a = run_precompute(g, cfg);
  const PrecomputeResult b = run_precompute(g, cfg);
  REQUIRE(a.groups.size() == b.groups.size());
  for (std::size_t i = 0; i < a.groups.size(); ++i) {
    REQUIRE(a.groups[i].slabs.size() == b.groups[i].slabs.size());
    for (std::size_t k = 0; k < a.groups[i].slabs.size(); ++k)
      CHECK(a.groups[i].slabs[k] == b.groups[i].slabs[k]);
  }
}

TEST_CASE("precompute validates its inputs") {
  const HeteroGraph g = featured_academic(15);
  PrecomputeConfig cfg = basic_config(g, Scheme::even_odd, 2, 1);
  cfg.iterations = 0;
  CHECK_THROWS_AS(run_precompute(g, cfg), ConfigError);
  cfg.iterations = 1;
  cfg.target = 99;
  CHECK_THROWS_AS(run_precompute(g, cfg), ConfigError);

  // A featureless type must be reported by name.
  HeteroGraph bare = testsupport::academic_graph();
  PrecomputeConfig cfg2 = basic_config(bare, Scheme::even_odd, 1, 1);
  try {
    run_precompute(bare, cfg2);
    FAIL("expected ConfigError for featureless types");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("p") != std::string::npos);
  }
}

TEST_CASE("two_hop enumeration respects the relation cap") {
  const HeteroGraph g = featured_academic(17);
  PrecomputeConfig cfg = basic_config(g, Scheme::two_hop, 1, 1);
  cfg.relation_cap = 2;
  CHECK_THROWS_AS(run_precompute(g, cfg), CapError);
  cfg.relation_cap = 512;
  CHECK(run_precompute(g, cfg).groups.size() > 3);
}

TEST_CASE("isolated vertex types are reported as warnings") {
  HeteroGraph g = build_graph(
      {{"a", 2}, {"p", 2}, {"lonely", 2}},
      {{"a", "write", "p", {{0, 0}, {1, 1}}, false}});
  testsupport::attach_all_features(g, 19);
  PrecomputeConfig cfg;
  cfg.scheme = Scheme::even_odd;
  cfg.iterations = 1;
  cfg.target = g.vertex_type_id("p");
  const PrecomputeResult res = run_precompute(g, cfg);
  REQUIRE_FALSE(res.warnings.empty());
  bool mentions = false;
  for (const std::string& w : res.warnings)
    mentions = mentions || w.find("lonely") != std::string::npos;
  CHECK(mentions);
}

TEST_CASE("archives round-trip bitwise with their metadata") {
  const HeteroGraph g = featured_academic(23);
  const PrecomputeConfig cfg = basic_config(g, Scheme::even_odd, 2, 31);
  const PrecomputeResult res = run_precompute(g, cfg);

  ArchiveMeta meta;
  meta.manifest_hash = "0123456789abcdef";
  meta.graph_hash = "fedcba9876543210";
  meta.scheme = cfg.scheme;
  meta.iterations = cfg.iterations;
  meta.target = "p";
  meta.rp = cfg.rp;

  const fs::path path = temp_file("rphgnn_archive_test.bin");
  save_groups(path.string(), res.groups, meta);
  const Archive back = load_groups(path.string());

  CHECK(back.meta.manifest_hash == meta.manifest_hash);
  CHECK(back.meta.graph_hash == meta.graph_hash);
  CHECK(back.meta.scheme == meta.scheme);
  CHECK(back.meta.iterations == meta.iterations);
  CHECK(back.meta.target == meta.target);
  CHECK(back.meta.rp.strategy == meta.rp.strategy);
  CHECK(back.meta.rp.p_sp == doctest::Approx(meta.rp.p_sp));
  CHECK(back.meta.rp.base_seed == meta.rp.base_seed);

  REQUIRE(back.groups.size() == res.groups.size());
  for (std::size_t i = 0; i < res.groups.size(); ++i) {
    CHECK(back.groups[i].relation_id == res.groups[i].relation_id);
    CHECK(back.groups[i].relation_compact == res.groups[i].relation_compact);
    REQUIRE(back.groups[i].slabs.size() == res.groups[i].slabs.size());
    for (std::size_t k = 0; k < res.groups[i].slabs.size(); ++k)
      CHECK(back.groups[i].slabs[k] == res.groups[i].slabs[k]);
  }
  fs::remove(path);
}

TEST_CASE("archive payload size is exactly groups * slabs * rows * cols * 4") {
  // 6 groups x 2 slabs x 100 rows x 16 cols x 4 bytes = 76800 payload bytes.
  HeteroGraph g = build_graph(
      {{"p", 100}, {"a", 100}, {"f", 100}},
      {{"p", "cite", "p", {{0, 1}}, true},
       {"a", "write", "p", {{0, 0}}, false},
       {"p", "has_field", "f", {{0, 0}}, false}});
  for (int t = 0; t < 3; ++t)
    g.attach_features(t, gaussian_matrix(100, 16, derive_seed(33, "f", t)));
  PrecomputeConfig cfg;
  cfg.scheme = Scheme::even_odd;
  cfg.iterations = 2;
  cfg.target = g.vertex_type_id("p");
  const PrecomputeResult res = run_precompute(g, cfg);
  REQUIRE(res.groups.size() == 6);

  ArchiveMeta meta;
  meta.scheme = cfg.scheme;
  meta.iterations = cfg.iterations;
  meta.target = "p";
  const fs::path path = temp_file("rphgnn_archive_size.bin");
  save_groups(path.string(), res.groups, meta);

  const std::vector<char> bytes = read_bytes(path);
  REQUIRE(bytes.size() > 12);
  std::uint32_t header_len = 0;
  std::memcpy(&header_len, bytes.data() + 8, 4);
  CHECK(bytes.size() == 12 + header_len + 6 * 2 * 100 * 16 * 4);
  fs::remove(path);
}

TEST_CASE("corrupt archives are rejected with format errors") {
  const HeteroGraph g = featured_academic(29);
  const PrecomputeConfig cfg = basic_config(g, Scheme::local, 1, 37);
  const PrecomputeResult res = run_precompute(g, cfg);
  ArchiveMeta meta;
  meta.scheme = cfg.scheme;
  meta.iterations = 1;
  meta.target = "p";
  const fs::path path = temp_file("rphgnn_archive_corrupt.bin");
  save_groups(path.string(), res.groups, meta);
  const std::vector<char> good = read_bytes(path);

  SUBCASE("bad magic") {
    std::vector<char> bad = good;
    bad[0] = 'X';
    write_bytes(path, bad);
    CHECK_THROWS_AS(load_groups(path.string()), FormatError);
  }
  SUBCASE("unsupported version") {
    std::vector<char> bad = good;
    bad[4] = 99;
    write_bytes(path, bad);
    CHECK_THROWS_AS(load_groups(path.string()), FormatError);
  }
  SUBCASE("truncated payload") {
    std::vector<char> bad(good.begin(), good.end() - 5);
    write_bytes(path, bad);
    CHECK_THROWS_AS(load_groups(path.string()), FormatError);
  }
  SUBCASE("trailing bytes") {
    std::vector<char> bad = good;
    bad.push_back('\0');
    write_bytes(path, bad);
    CHECK_THROWS_AS(load_groups(path.string()), FormatError);
  }
  SUBCASE("mangled header json") {
    std::vector<char> bad = good;
    bad[12] = '?';  // first header byte: breaks the JSON object
    write_bytes(path, bad);
    CHECK_THROWS_AS(load_groups(path.string()), FormatError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_groups((path.string() + ".nope")), FormatError);
  }
  fs::remove(path);
}
