#include "rphgnn/relations.hpp"

#include <algorithm>
#include <map>

#include "rphgnn/errors.hpp"

namespace rphgnn {

std::string scheme_to_string(Scheme s) {
  switch (s) {
    case Scheme::local: return "local";
    case Scheme::even_odd: return "even_odd";
    case Scheme::two_hop: return "two_hop";
  }
  throw ConfigError("scheme_to_string: unknown scheme");
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "local") return Scheme::local;
  if (s == "even_odd" || s == "even-odd") return Scheme::even_odd;
  if (s == "two_hop" || s == "two-hop") return Scheme::two_hop;
  throw ConfigError("unknown scheme '" + s + "'");
}

void validate_relation(const HeteroGraph& g, const Relation& r) {
  if (r.edges.empty()) throw ConfigError("relation: empty edge chain");
  for (int e : r.edges)
    if (e < 0 || static_cast<std::size_t>(e) >= g.edge_types.size())
      throw ConfigError("relation: unknown edge type id");
  for (std::size_t i = 0; i + 1 < r.edges.size(); ++i) {
    if (g.edge_types[r.edges[i]].dst != g.edge_types[r.edges[i + 1]].src)
      throw ConfigError("relation: incompatible chain at hop " +
                        std::to_string(i));
  }
  if (r.parity == Parity::odd && r.edges.size() != 1)
    throw ConfigError("relation: odd parity requires a single hop");
  if (r.parity == Parity::even) {
    if (r.edges.size() != 2 ||
        g.edge_types[r.edges[1]].reverse != r.edges[0])
      throw ConfigError(
          "relation: even parity requires the reverse hop followed by its "
          "forward hop");
  }
}

int relation_start_type(const HeteroGraph& g, const Relation& r) {
  return g.edge_types[r.edges.front()].src;
}

int relation_end_type(const HeteroGraph& g, const Relation& r) {
  return g.edge_types[r.edges.back()].dst;
}

std::string render_relation(const HeteroGraph& g, const Relation& r) {
  std::string out = g.vertex_types[g.edge_types[r.edges.front()].src].name;
  for (int e : r.edges) {
    out += " --" + g.edge_types[e].name + "--> " +
           g.vertex_types[g.edge_types[e].dst].name;
  }
  return out;
}

std::string render_relation_compact(const HeteroGraph& g, const Relation& r) {
  std::string out = g.vertex_types[g.edge_types[r.edges.front()].src].name;
  for (int e : r.edges) out += "→" + g.vertex_types[g.edge_types[e].dst].name;
  return out;
}

namespace {

// Edge type ids ending at target, ordered by edge-type name.  This matches
// the conventional presentation of relation groups; general chains fall back
// to full-string lexicographic order instead.
std::vector<int> edges_into(const HeteroGraph& g, int target) {
  std::vector<int> ids;
  for (std::size_t e = 0; e < g.edge_types.size(); ++e)
    if (g.edge_types[e].dst == target) ids.push_back(static_cast<int>(e));
  std::sort(ids.begin(), ids.end(), [&](int a, int b) {
    return g.edge_types[a].name < g.edge_types[b].name;
  });
  return ids;
}

void check_target(const HeteroGraph& g, int target) {
  if (target < 0 || static_cast<std::size_t>(target) >= g.vertex_types.size())
    throw ConfigError("unknown target vertex type id");
}

}  // namespace

std::vector<Relation> local_relations(const HeteroGraph& g, int target) {
  check_target(g, target);
  std::vector<Relation> out;
  for (int e : edges_into(g, target)) out.push_back({{e}, Parity::odd});
  return out;
}

std::vector<Relation> even_odd_relations(const HeteroGraph& g, int target) {
  check_target(g, target);
  std::vector<Relation> out = local_relations(g, target);
  for (int e : edges_into(g, target)) {
    const int rev = g.edge_types[e].reverse;
    if (rev < 0 || static_cast<std::size_t>(rev) >= g.edge_types.size())
      throw ConfigError("even_odd_relations: edge type '" +
                        g.edge_types[e].name + "' has no reverse type");
    out.push_back({{rev, e}, Parity::even});
  }
  return out;
}

std::vector<Relation> enumerate_relations(const HeteroGraph& g, int target,
                                          int max_hops, std::size_t cap) {
  check_target(g, target);
  if (max_hops < 1)
    throw ConfigError("enumerate_relations: max_hops must be at least 1");
  std::vector<std::vector<int>> frontier;
  for (int e : edges_into(g, target)) frontier.push_back({e});
  std::vector<Relation> out;
  for (int hops = 1; hops <= max_hops; ++hops) {
    for (const auto& chain : frontier) {
      out.push_back({chain, Parity::general});
      if (out.size() > cap)
        throw CapError("enumerate_relations: relation count exceeds cap of " +
                       std::to_string(cap));
    }
    if (hops == max_hops) break;
    std::vector<std::vector<int>> next;
    for (const auto& chain : frontier) {
      for (int e : edges_into(g, g.edge_types[chain.front()].src)) {
        std::vector<int> longer;
        longer.reserve(chain.size() + 1);
        longer.push_back(e);
        longer.insert(longer.end(), chain.begin(), chain.end());
        next.push_back(std::move(longer));
        if (next.size() > cap)
          throw CapError("enumerate_relations: relation count exceeds cap of " +
                         std::to_string(cap));
      }
    }
    frontier = std::move(next);
  }
  std::sort(out.begin(), out.end(), [&](const Relation& a, const Relation& b) {
    return render_relation(g, a) < render_relation(g, b);
  });
  return out;
}

std::vector<Relation> scheme_relations(const HeteroGraph& g, int target,
                                       Scheme scheme, std::size_t cap) {
  switch (scheme) {
    case Scheme::local: return local_relations(g, target);
    case Scheme::even_odd: return even_odd_relations(g, target);
    case Scheme::two_hop: return enumerate_relations(g, target, 2, cap);
  }
  throw ConfigError("scheme_relations: unknown scheme");
}

Matrix<double> oracle_aggregate(const HeteroGraph& g, const Relation& r,
                                const std::vector<Matrix<double>>& state_by_type) {
  validate_relation(g, r);
  if (state_by_type.size() != g.vertex_types.size())
    throw ConfigError("oracle_aggregate: state_by_type size mismatch");
  const int start = relation_start_type(g, r);
  Matrix<double> x = state_by_type[start];
  if (x.rows() != g.vertex_types[start].count)
    throw ConfigError("oracle_aggregate: state rows do not match '" +
                      g.vertex_types[start].name + "' count");
  for (int e : r.edges) {
    const CsrAdjacency& adj = g.adj[e];
    // Materialize the degree-normalized adjacency densely and multiply
    // naively; intentionally a different code path from the sparse kernels.
    Matrix<double> dn(adj.rows, adj.cols);
    for (std::size_t i = 0; i < adj.rows; ++i) {
      const std::size_t deg = adj.degree(i);
      if (deg == 0) continue;
      for (std::size_t k = adj.row_offsets[i]; k < adj.row_offsets[i + 1]; ++k)
        dn(i, adj.col_indices[k]) += 1.0 / static_cast<double>(deg);
    }
    Matrix<double> y(adj.rows, x.cols());
    for (std::size_t i = 0; i < adj.rows; ++i)
      for (std::size_t j = 0; j < x.cols(); ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < adj.cols; ++k) acc += dn(i, k) * x(k, j);
        y(i, j) = acc;
      }
    x = std::move(y);
  }
  return x;
}

// --- Provenance ledger -------------------------------------------------------

ProvenanceLedger provenance_ledger(const HeteroGraph& g, int target,
                                   Scheme scheme, int iterations,
                                   std::size_t cap) {
  check_target(g, target);
  if (iterations < 1)
    throw ConfigError("provenance_ledger: iterations must be at least 1");

  const std::size_t nt = g.vertex_types.size();
  std::vector<std::vector<Relation>> rels(nt);
  for (std::size_t t = 0; t < nt; ++t)
    rels[t] = scheme_relations(g, static_cast<int>(t), scheme, cap);

  ProvenanceLedger ledger;
  ledger.scheme = scheme;
  ledger.iterations = iterations;
  ledger.target = g.vertex_types[target].name;
  for (const Relation& r : rels[target]) {
    ledger.groups.push_back(render_relation_compact(g, r));
    ledger.groups_full.push_back(render_relation(g, r));
  }

  using Path = std::vector<int>;  // edge-type ids; empty = raw features
  // states[t] = distinct signal paths merged into type t's current state.
  std::vector<std::vector<Path>> states(nt, {Path{}});

  auto compact_path = [&](const Path& p) {
    std::string out = g.vertex_types[g.edge_types[p.front()].src].name;
    for (int e : p) out += "→" + g.vertex_types[g.edge_types[e].dst].name;
    return out;
  };

  for (int k = 1; k <= iterations; ++k) {
    std::vector<std::vector<Path>> next(nt);
    for (std::size_t t = 0; t < nt; ++t) {
      for (std::size_t gi = 0; gi < rels[t].size(); ++gi) {
        const Relation& r = rels[t][gi];
        const int start = relation_start_type(g, r);
        std::vector<Path> cell;
        cell.reserve(states[start].size());
        for (const Path& x : states[start]) {
          Path p = x;
          p.insert(p.end(), r.edges.begin(), r.edges.end());
          cell.push_back(std::move(p));
        }
        if (static_cast<int>(t) == target) {
          LedgerCell lc;
          lc.group = static_cast<int>(gi);
          lc.iteration = k;
          lc.updates = k - 1;
          lc.label = (k == 1) ? "(0,raw)" : "(" + std::to_string(k - 1) + ")";
          for (const Path& p : cell) lc.relations.push_back(compact_path(p));
          ledger.cells.push_back(std::move(lc));
        }
        // Merge into the next state, keeping first-seen order and dropping
        // duplicates (the same composition can arrive via different groups).
        for (Path& p : cell) {
          if (std::find(next[t].begin(), next[t].end(), p) == next[t].end())
            next[t].push_back(std::move(p));
        }
      }
    }
    states = std::move(next);
  }
  return ledger;
}

std::string ledger_to_markdown(const ProvenanceLedger& ledger) {
  std::string md = "# Collection ledger\n\n";
  md += "scheme: " + scheme_to_string(ledger.scheme) +
        ", iterations: " + std::to_string(ledger.iterations) +
        ", target: " + ledger.target + "\n\n";
  md += "| iteration |";
  for (const std::string& gstr : ledger.groups) md += " " + gstr + " |";
  md += "\n|---|";
  for (std::size_t i = 0; i < ledger.groups.size(); ++i) md += "---|";
  md += "\n";
  for (int k = 1; k <= ledger.iterations; ++k) {
    md += "| " + std::to_string(k) + " |";
    for (std::size_t gi = 0; gi < ledger.groups.size(); ++gi) {
      for (const LedgerCell& c : ledger.cells) {
        if (c.iteration != k || c.group != static_cast<int>(gi)) continue;
        md += " ";
        for (const std::string& r : c.relations) md += r + "<br>";
        md += c.label + " |";
        break;
      }
    }
    md += "\n";
  }
  return md;
}

nlohmann::json ledger_to_json(const ProvenanceLedger& ledger) {
  nlohmann::json j;
  j["scheme"] = scheme_to_string(ledger.scheme);
  j["iterations"] = ledger.iterations;
  j["target"] = ledger.target;
  j["groups"] = nlohmann::json::array();
  for (std::size_t i = 0; i < ledger.groups.size(); ++i)
    j["groups"].push_back(
        {{"compact", ledger.groups[i]}, {"full", ledger.groups_full[i]}});
  j["cells"] = nlohmann::json::array();
  for (const LedgerCell& c : ledger.cells) {
    j["cells"].push_back({{"group", ledger.groups[c.group]},
                          {"iteration", c.iteration},
                          {"relations", c.relations},
                          {"updates", c.updates},
                          {"label", c.label}});
  }
  return j;
}

}  // namespace rphgnn
