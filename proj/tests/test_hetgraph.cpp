#include <algorithm>
#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include "doctest.h"
#include "rphgnn/errors.hpp"
#include "rphgnn/hetgraph.hpp"
#include "rphgnn/rng.hpp"
#include "support/graphs.hpp"

using namespace rphgnn;

namespace {

std::set<std::pair<std::uint32_t, std::uint32_t>> edge_set(
    const CsrAdjacency& adj) {
  std::set<std::pair<std::uint32_t, std::uint32_t>> out;
  for (std::size_t r = 0; r < adj.rows; ++r)
    for (std::size_t e = adj.row_offsets[r]; e < adj.row_offsets[r + 1]; ++e)
      out.emplace(static_cast<std::uint32_t>(r), adj.col_indices[e]);
  return out;
}

}  // namespace

TEST_CASE("a single self-inverse type symmetrizes into one edge type") {
  const HeteroGraph g = build_graph(
      {{"p", 3}},
      {{"p", "cite", "p", {{0, 1}}, true}});
  REQUIRE(g.edge_types.size() == 1);
  const EdgeType& et = g.edge_types[0];
  CHECK(et.name == "cite");
  CHECK(et.reverse == 0);
  CHECK(et.self_inverse);
  CHECK_FALSE(et.is_reverse);
  // Symmetrized: both (1 <- 0) and (0 <- 1) are stored.
  CHECK(edge_set(g.adj[0]) ==
        std::set<std::pair<std::uint32_t, std::uint32_t>>{{0, 1}, {1, 0}});
}

TEST_CASE("a directed type materializes a reverse with swapped endpoints") {
  const HeteroGraph g = build_graph(
      {{"a", 2}, {"p", 3}},
      {{"a", "write", "p", {{0, 0}, {1, 2}}, false}});
  REQUIRE(g.edge_types.size() == 2);
  const int fwd = g.edge_type_id("write");
  const int rev = g.edge_type_id("r.write");
  REQUIRE(fwd >= 0);
  REQUIRE(rev >= 0);
  CHECK(g.edge_types[fwd].src == g.vertex_type_id("a"));
  CHECK(g.edge_types[fwd].dst == g.vertex_type_id("p"));
  CHECK(g.edge_types[fwd].reverse == rev);
  CHECK(g.edge_types[rev].reverse == fwd);
  CHECK(g.edge_types[rev].is_reverse);
  CHECK(g.edge_types[rev].src == g.vertex_type_id("p"));
  CHECK(g.edge_types[rev].dst == g.vertex_type_id("a"));
  // CSR rows are destinations: write rows are papers, r.write rows authors.
  CHECK(g.adj[fwd].rows == 3);
  CHECK(g.adj[fwd].cols == 2);
  CHECK(g.adj[rev].rows == 2);
  CHECK(g.adj[rev].cols == 3);
}

TEST_CASE("the academic fixture has 7 edge types, 8 with directed citations") {
  CHECK(testsupport::academic_graph().edge_types.size() == 7);
  CHECK(testsupport::academic_graph_directed_cite().edge_types.size() == 8);
}

TEST_CASE("reverse adjacency is the transpose of the forward adjacency") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const HeteroGraph g = testsupport::random_graph(seed, 12);
    for (std::size_t e = 0; e < g.edge_types.size(); ++e) {
      const EdgeType& et = g.edge_types[e];
      const auto fwd = edge_set(g.adj[e]);
      const auto rev = edge_set(g.adj[et.reverse]);
      std::set<std::pair<std::uint32_t, std::uint32_t>> flipped;
      for (const auto& [d, s] : rev) flipped.emplace(s, d);
      CHECK(fwd == flipped);
    }
  }
}

TEST_CASE("adjacency row degrees match a naive edge-scan counter") {
  const HeteroGraph g = testsupport::random_graph(99, 15);
  for (std::size_t e = 0; e < g.edge_types.size(); ++e) {
    const CsrAdjacency& adj = g.adj[e];
    std::vector<std::size_t> counts(adj.rows, 0);
    for (const auto& [d, s] : edge_set(adj)) {
      (void)s;
      ++counts[d];
    }
    std::size_t total = 0;
    for (std::size_t r = 0; r < adj.rows; ++r) {
      CHECK(adj.degree(r) == counts[r]);
      total += counts[r];
    }
    CHECK(adj.nnz() == total);
    // Column indices are sorted and unique within each row.
    for (std::size_t r = 0; r < adj.rows; ++r) {
      for (std::size_t k = adj.row_offsets[r] + 1; k < adj.row_offsets[r + 1];
           ++k)
        CHECK(adj.col_indices[k - 1] < adj.col_indices[k]);
    }
  }
}

TEST_CASE("build_graph rejects malformed inputs") {
  const std::vector<VertexType> vts = {{"a", 2}, {"p", 3}};
  CHECK_THROWS_AS(
      build_graph(vts, {{"x", "write", "p", {{0, 0}}, false}}),
      ConfigError);  // unknown src type
  CHECK_THROWS_AS(
      build_graph(vts, {{"a", "write", "p", {{2, 0}}, false}}),
      ConfigError);  // src index out of range
  CHECK_THROWS_AS(
      build_graph(vts, {{"a", "write", "p", {{0, 3}}, false}}),
      ConfigError);  // dst index out of range
  CHECK_THROWS_AS(
      build_graph(vts, {{"a", "write", "p", {{0, 0}}, false},
                        {"a", "write", "p", {{1, 1}}, false}}),
      ConfigError);  // duplicate declared triple
  CHECK_THROWS_AS(
      build_graph(vts, {{"a", "write", "p", {{0, 0}}, true}}),
      ConfigError);  // self-inverse across two distinct types
  CHECK_THROWS_AS(build_graph({{"a", 2}, {"a", 3}}, {}), ConfigError);
}

TEST_CASE("degree_normalized_product averages in-neighbor rows") {
  // Two sources with one-hot states; v0 receives both, v1 none, v2 only s1.
  CsrAdjacency adj;
  adj.rows = 3;
  adj.cols = 2;
  adj.row_offsets = {0, 2, 2, 3};
  adj.col_indices = {0, 1, 1};
  Matrix<float> state(2, 2);
  state(0, 0) = 1.0f;
  state(1, 1) = 1.0f;
  const Matrix<float> out = degree_normalized_product(adj, state);
  CHECK(out(0, 0) == doctest::Approx(0.5f));
  CHECK(out(0, 1) == doctest::Approx(0.5f));
  CHECK(out(1, 0) == 0.0f);
  CHECK(out(1, 1) == 0.0f);
  CHECK(out(2, 0) == 0.0f);
  CHECK(out(2, 1) == doctest::Approx(1.0f));
}

TEST_CASE("degree_normalized_product matches a dense-matrix oracle") {
  const HeteroGraph g = testsupport::random_graph(7, 20);
  for (std::size_t e = 0; e < g.edge_types.size(); ++e) {
    const EdgeType& et = g.edge_types[e];
    const Matrix<float>& state = g.features[et.src];
    const Matrix<float> got = degree_normalized_product(g.adj[e], state);
    // Dense 64-bit (D^-1 A) H.
    const CsrAdjacency& adj = g.adj[e];
    Matrix<double> want(adj.rows, state.cols());
    for (std::size_t r = 0; r < adj.rows; ++r) {
      const std::size_t deg = adj.degree(r);
      if (deg == 0) continue;
      for (std::size_t k = adj.row_offsets[r]; k < adj.row_offsets[r + 1]; ++k)
        for (std::size_t j = 0; j < state.cols(); ++j)
          want(r, j) += static_cast<double>(state(adj.col_indices[k], j));
      for (std::size_t j = 0; j < state.cols(); ++j)
        want(r, j) /= static_cast<double>(deg);
    }
    double max_diff = 0.0;
    for (std::size_t r = 0; r < got.rows(); ++r)
      for (std::size_t j = 0; j < got.cols(); ++j)
        max_diff = std::max(
            max_diff, std::abs(static_cast<double>(got(r, j)) - want(r, j)));
    CHECK(max_diff <= 1e-5);
  }
}

TEST_CASE("mean aggregation stays inside the source value bounds") {
  const HeteroGraph g = testsupport::random_graph(31, 18);
  for (std::size_t e = 0; e < g.edge_types.size(); ++e) {
    const Matrix<float>& state = g.features[g.edge_types[e].src];
    const Matrix<float> out = degree_normalized_product(g.adj[e], state);
    for (std::size_t j = 0; j < state.cols(); ++j) {
      float lo = 0.0f, hi = 0.0f;  // zero rows are always representable
      for (std::size_t r = 0; r < state.rows(); ++r) {
        lo = std::min(lo, state(r, j));
        hi = std::max(hi, state(r, j));
      }
      for (std::size_t r = 0; r < out.rows(); ++r) {
        CHECK(out(r, j) >= lo - 1e-5f);
        CHECK(out(r, j) <= hi + 1e-5f);
      }
    }
  }
}

TEST_CASE("attach_features validates type id, row count and re-attachment") {
  HeteroGraph g = testsupport::academic_graph();
  const int p = g.vertex_type_id("p");
  CHECK_THROWS_AS(g.attach_features(-1, Matrix<float>(6, 2)), ConfigError);
  CHECK_THROWS_AS(g.attach_features(p, Matrix<float>(5, 2)), ConfigError);
  g.attach_features(p, Matrix<float>(6, 2));
  CHECK(g.has_features(p));
  CHECK(g.feature_dim(p) == 2);
  CHECK_THROWS_AS(g.attach_features(p, Matrix<float>(6, 2)), ConfigError);
}

TEST_CASE("random embeddings are seed-deterministic with N(0,1) moments") {
  HeteroGraph g = build_graph({{"h", 100000}}, {});
  attach_random_embeddings(g, 0, 4, 77);
  HeteroGraph g2 = build_graph({{"h", 100000}}, {});
  attach_random_embeddings(g2, 0, 4, 77);
  CHECK(g.features[0] == g2.features[0]);

  const Matrix<float>& m = g.features[0];
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      sum += m(i, j);
      sq += static_cast<double>(m(i, j)) * m(i, j);
    }
    const double mean = sum / static_cast<double>(m.rows());
    const double stddev =
        std::sqrt(sq / static_cast<double>(m.rows()) - mean * mean);
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(stddev - 1.0) < 0.02);
  }

  HeteroGraph g3 = build_graph({{"h", 100000}}, {});
  attach_random_embeddings(g3, 0, 4, 78);
  CHECK_FALSE(g.features[0] == g3.features[0]);
}
