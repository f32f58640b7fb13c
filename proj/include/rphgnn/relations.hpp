#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"
#include "rphgnn/hetgraph.hpp"
#include "rphgnn/matrix.hpp"

namespace rphgnn {

// A relation's parity decides which iteration-(k-1) state its collection
// reads: odd relations are single hops reading the edge's source type, even
// relations bounce through the reverse type first and read the target type
// itself, general relations are arbitrary chains reading the chain's start.
enum class Parity { odd, even, general };

enum class Scheme { local, even_odd, two_hop };

std::string scheme_to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);  // ConfigError when unknown

// A chain of edge-type ids; each hop's destination is the next hop's source.
struct Relation {
  std::vector<int> edges;
  Parity parity = Parity::general;

  bool operator==(const Relation& o) const {
    return edges == o.edges && parity == o.parity;
  }
};

// ConfigError on empty chains, incompatible hops, or parity shapes that do
// not match (odd = one hop; even = reverse hop followed by its forward hop).
void validate_relation(const HeteroGraph& g, const Relation& r);

int relation_start_type(const HeteroGraph& g, const Relation& r);
int relation_end_type(const HeteroGraph& g, const Relation& r);

// "a --write--> p" / "p --r.write--> a --write--> p"; the canonical relation
// identity used for projection seeding and archive headers.
std::string render_relation(const HeteroGraph& g, const Relation& r);
// Vertex-type sequence only: "p→a→p".
std::string render_relation_compact(const HeteroGraph& g, const Relation& r);

// One odd relation per edge type ending at target, ordered by edge-type name.
std::vector<Relation> local_relations(const HeteroGraph& g, int target);

// The odd block followed by the even block (one even relation per edge type
// ending at target, through its reverse), each ordered by edge-type name.
std::vector<Relation> even_odd_relations(const HeteroGraph& g, int target);

// Every edge-type chain of length 1..max_hops ending at target, ordered
// lexicographically by rendered string.  Throws ConfigError when
// max_hops < 1 and CapError when the count exceeds cap.
std::vector<Relation> enumerate_relations(
    const HeteroGraph& g, int target, int max_hops,
    std::size_t cap = std::numeric_limits<std::size_t>::max());

std::vector<Relation> scheme_relations(
    const HeteroGraph& g, int target, Scheme scheme,
    std::size_t cap = std::numeric_limits<std::size_t>::max());

// Serial 64-bit ground truth for a relation-wise collection: materializes
// each hop's degree-normalized adjacency densely and chains naive products.
// state_by_type is indexed by vertex type id.
Matrix<double> oracle_aggregate(const HeteroGraph& g, const Relation& r,
                                const std::vector<Matrix<double>>& state_by_type);

// --- Provenance ledger -----------------------------------------------------
//
// Symbolic replay of the precompute loop: for every archived group and
// iteration, which relation compositions were merged into the collected
// tensor, and how many untrainable squash updates the signal passed through.

struct LedgerCell {
  int group = 0;      // index into ProvenanceLedger::groups
  int iteration = 1;  // 1-based
  std::vector<std::string> relations;  // compact strings, generation order
  int updates = 0;                     // untrainable update count
  std::string label;                   // "(0,raw)" for iteration 1, else "(k)"
};

struct ProvenanceLedger {
  Scheme scheme = Scheme::even_odd;
  int iterations = 0;
  std::string target;
  std::vector<std::string> groups;       // compact rendering, canonical order
  std::vector<std::string> groups_full;  // full rendering
  std::vector<LedgerCell> cells;         // iteration-major, then group
};

ProvenanceLedger provenance_ledger(
    const HeteroGraph& g, int target, Scheme scheme, int iterations,
    std::size_t cap = std::numeric_limits<std::size_t>::max());

std::string ledger_to_markdown(const ProvenanceLedger& ledger);
nlohmann::json ledger_to_json(const ProvenanceLedger& ledger);

}  // namespace rphgnn
