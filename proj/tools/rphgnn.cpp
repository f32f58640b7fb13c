// Command-line front end for the precompute-and-train pipeline.
//
// Subcommands:
//   synth       generate a synthetic labeled graph directory
//   precompute  collect + squash a graph into an archive of group tensors
//   train       fit the encoder head on an archive, emit checkpoint/metrics
//   ledger      print the relation provenance ledger for a graph
//   bench       time training epochs against the iteration count
//
// Exit codes: 0 ok, 2 malformed data (FormatError), 3 bad configuration
// (ConfigError / usage errors), 4 resource cap exceeded (CapError).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"
#include "rphgnn/encoder.hpp"
#include "rphgnn/errors.hpp"
#include "rphgnn/graph_io.hpp"
#include "rphgnn/manifest.hpp"
#include "rphgnn/precompute.hpp"
#include "rphgnn/relations.hpp"
#include "rphgnn/synth.hpp"
#include "rphgnn/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void apply_threads(int threads) {
  if (threads <= 0) return;
#ifdef _OPENMP
  omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

rphgnn::RunManifest load_manifest(const std::string& config_path) {
  rphgnn::RunManifest m;
  if (config_path.empty()) return m;
  std::ifstream in(config_path);
  if (!in) throw rphgnn::ConfigError("cannot open config file: " + config_path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw rphgnn::ConfigError("config file " + config_path + ": " + e.what());
  }
  return rphgnn::manifest_from_json(j);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw rphgnn::ConfigError("cannot write " + path);
  out << text;
}

json metrics_to_json(const rphgnn::Metrics& m) {
  return json{{"accuracy", m.accuracy},
              {"micro_f1", m.micro_f1},
              {"macro_f1", m.macro_f1},
              {"count", m.count}};
}

struct PrecomputeArgs {
  std::string graph_dir;
  std::string out_dir = "out";
  std::string config;
  std::string scheme;
  int iterations = -1;
  double p_sp = -1.0;
  std::string rp;
  std::size_t dim = 0;
  std::size_t relation_cap = 0;
  bool cap_set = false;
  std::int64_t seed = -1;
  int threads = 0;
};

int cmd_precompute(const PrecomputeArgs& a) {
  apply_threads(a.threads);
  rphgnn::RunManifest m = load_manifest(a.config);
  if (!a.scheme.empty()) m.scheme = rphgnn::scheme_from_string(a.scheme);
  if (a.iterations >= 0) m.iterations = a.iterations;
  if (a.p_sp >= 0.0) m.p_sp = a.p_sp;
  if (!a.rp.empty()) m.rp_strategy = rphgnn::rp_strategy_from_string(a.rp);
  if (a.dim > 0) m.embedding_dim = a.dim;
  if (a.cap_set) m.relation_cap = a.relation_cap;
  if (a.seed >= 0) m.seed = static_cast<std::uint64_t>(a.seed);

  rphgnn::LoadedGraph loaded = rphgnn::load_graph_dir(a.graph_dir);
  m.graph_hash = loaded.graph_hash;
  const std::string hash = rphgnn::manifest_hash(m);

  rphgnn::HeteroGraph& g = loaded.graph;
  for (std::size_t vt = 0; vt < g.vertex_types.size(); ++vt) {
    const int id = static_cast<int>(vt);
    if (!g.has_features(id))
      rphgnn::attach_random_embeddings(g, id, m.embedding_dim,
                                       rphgnn::embedding_seed(m, id));
  }

  rphgnn::PrecomputeConfig pc;
  pc.scheme = m.scheme;
  pc.iterations = m.iterations;
  pc.rp.strategy = m.rp_strategy;
  pc.rp.p_sp = m.p_sp;
  pc.rp.base_seed = rphgnn::rp_seed(m);
  pc.target = g.vertex_type_id(loaded.target);
  pc.relation_cap = m.relation_cap;

  rphgnn::PrecomputeResult result = rphgnn::run_precompute(g, pc);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";

  fs::create_directories(a.out_dir);
  rphgnn::ArchiveMeta meta;
  meta.manifest_hash = hash;
  meta.graph_hash = loaded.graph_hash;
  meta.scheme = m.scheme;
  meta.iterations = m.iterations;
  meta.target = loaded.target;
  meta.rp = pc.rp;
  const std::string archive_path = (fs::path(a.out_dir) / "archive.bin").string();
  rphgnn::save_groups(archive_path, result.groups, meta);
  write_text((fs::path(a.out_dir) / "manifest.json").string(),
             rphgnn::manifest_to_json(m).dump(2) + "\n");

  std::cout << "manifest " << hash << "\n";
  std::cout << "graph " << loaded.graph_hash << " target " << loaded.target
            << "\n";
  for (const auto& grp : result.groups)
    std::cout << "group " << grp.relation_compact << " slabs "
              << grp.slabs.size() << " rows " << grp.slabs.front().rows()
              << " cols " << grp.slabs.front().cols() << "  [" << grp.relation_id
              << "]\n";
  std::cout << "wrote " << archive_path << "\n";
  return 0;
}

struct TrainArgs {
  std::string archive;
  std::string graph_dir;
  std::string out_dir = "out";
  std::string config;
  double lr = -1.0;
  std::int64_t batch_size = -1;
  int patience = -1;
  int max_epochs = -1;
  std::int64_t seed = -1;
  int threads = 0;
};

int cmd_train(const TrainArgs& a) {
  apply_threads(a.threads);
  std::string config_path = a.config;
  if (config_path.empty()) {
    const fs::path side = fs::path(a.archive).parent_path() / "manifest.json";
    if (fs::exists(side)) config_path = side.string();
  }
  rphgnn::RunManifest m = load_manifest(config_path);

  rphgnn::Archive archive = rphgnn::load_groups(a.archive);
  if (archive.groups.empty())
    throw rphgnn::ConfigError("archive holds no group tensors");
  // Stage consistency: the archive must have been produced under the manifest
  // we are about to train with, and from the same graph data.
  if (rphgnn::manifest_hash(m) != archive.meta.manifest_hash)
    throw rphgnn::FormatError(
        "archive manifest hash " + archive.meta.manifest_hash +
        " does not match the loaded config (" + rphgnn::manifest_hash(m) + ")");
  const std::string graph_hash = rphgnn::graph_dir_hash(a.graph_dir);
  if (graph_hash != archive.meta.graph_hash)
    throw rphgnn::FormatError("archive was built from a different graph (" +
                              archive.meta.graph_hash + " vs " + graph_hash +
                              ")");

  // Command-line overrides of training-stage fields are an explicit new run
  // configuration; artifacts record the effective manifest hash.
  if (a.lr >= 0.0) m.lr = a.lr;
  if (a.batch_size > 0) m.batch_size = static_cast<std::size_t>(a.batch_size);
  if (a.patience > 0) m.patience = a.patience;
  if (a.max_epochs > 0) m.max_epochs = a.max_epochs;
  if (a.seed >= 0) m.seed = static_cast<std::uint64_t>(a.seed);
  const std::string hash = rphgnn::manifest_hash(m);

  const std::size_t target_count = archive.groups.front().slabs.front().rows();
  std::vector<std::uint32_t> labels =
      rphgnn::load_labels(a.graph_dir, target_count);
  rphgnn::Split split = rphgnn::load_split(a.graph_dir);

  std::size_t num_classes = 0;
  for (std::uint32_t y : labels)
    if (y != rphgnn::kUnlabeled && y + 1 > num_classes) num_classes = y + 1;
  if (num_classes < 2)
    throw rphgnn::ConfigError("labels define fewer than two classes");

  rphgnn::EncoderConfig enc = m.encoder;
  enc.num_classes = num_classes;
  rphgnn::TrainConfig tc;
  tc.lr = m.lr;
  tc.batch_size = m.batch_size;
  tc.patience = m.patience;
  tc.max_epochs = m.max_epochs;
  tc.seed = rphgnn::train_seed(m);

  rphgnn::TrainResult result =
      rphgnn::train(archive.groups, labels, split, enc, tc);
  rphgnn::Metrics valid = rphgnn::evaluate(result.best_params, archive.groups,
                                           labels, split.valid, enc);
  rphgnn::Metrics test = rphgnn::evaluate(result.best_params, archive.groups,
                                          labels, split.test, enc);

  fs::create_directories(a.out_dir);
  rphgnn::CheckpointMeta ck;
  ck.cfg = enc;
  for (const auto& grp : archive.groups) {
    ck.group_relations.push_back(grp.relation_id);
    ck.group_dims.push_back(grp.slabs.front().cols());
  }
  ck.iterations = archive.groups.front().slabs.size();
  ck.manifest_hash = hash;
  rphgnn::save_checkpoint((fs::path(a.out_dir) / "checkpoint.bin").string(),
                          result.best_params, ck);
  rphgnn::write_history_csv((fs::path(a.out_dir) / "history.csv").string(),
                            result.history, hash);
  json metrics{{"manifest", hash},
               {"best_epoch", result.best_epoch},
               {"valid", metrics_to_json(valid)},
               {"test", metrics_to_json(test)}};
  write_text((fs::path(a.out_dir) / "metrics.json").string(),
             metrics.dump(2) + "\n");

  std::printf("best epoch %d  valid acc %.4f\n", result.best_epoch,
              valid.accuracy);
  std::printf("test acc %.4f  micro-f1 %.4f  macro-f1 %.4f\n", test.accuracy,
              test.micro_f1, test.macro_f1);
  return 0;
}

struct LedgerArgs {
  std::string graph_dir;
  std::string scheme = "even-odd";
  int iterations = 2;
  std::size_t relation_cap = 0;
  bool cap_set = false;
  std::string target;
  std::string format = "markdown";
  std::string out;
};

int cmd_ledger(const LedgerArgs& a) {
  rphgnn::LoadedGraph loaded = rphgnn::load_graph_dir(a.graph_dir);
  const std::string target_name = a.target.empty() ? loaded.target : a.target;
  const int target = loaded.graph.vertex_type_id(target_name);
  if (target < 0)
    throw rphgnn::ConfigError("unknown target vertex type: " + target_name);
  std::size_t cap = std::numeric_limits<std::size_t>::max();
  if (a.cap_set) cap = a.relation_cap;
  rphgnn::ProvenanceLedger ledger = rphgnn::provenance_ledger(
      loaded.graph, target, rphgnn::scheme_from_string(a.scheme), a.iterations,
      cap);
  std::string text;
  if (a.format == "markdown") {
    text = rphgnn::ledger_to_markdown(ledger);
  } else if (a.format == "json") {
    text = rphgnn::ledger_to_json(ledger).dump(2) + "\n";
  } else {
    throw rphgnn::ConfigError("unknown ledger format: " + a.format);
  }
  if (a.out.empty())
    std::cout << text;
  else
    write_text(a.out, text);
  return 0;
}

struct SynthArgs {
  std::string out_dir;
  std::size_t targets = 2000;
  std::size_t classes = 5;
  double signal = 1.0;
  std::int64_t seed = 7;
};

int cmd_synth(const SynthArgs& a) {
  rphgnn::SynthConfig cfg;
  cfg.targets = a.targets;
  cfg.classes = a.classes;
  cfg.signal = a.signal;
  cfg.seed = static_cast<std::uint64_t>(a.seed);
  rphgnn::write_synth(a.out_dir, cfg);
  std::cout << "wrote " << a.out_dir << " (" << cfg.targets << " targets, "
            << cfg.classes << " classes, signal " << a.signal << ")\n";
  return 0;
}

struct BenchArgs {
  std::string k_values = "1,2,4,8";
  std::size_t rows = 2000;
  std::size_t groups = 4;
  std::size_t dim = 64;
  std::size_t hidden = 32;
  std::size_t classes = 5;
  int reps = 3;
  std::int64_t seed = 1;
  std::string out;
  int threads = 0;
};

int cmd_bench(const BenchArgs& a) {
  apply_threads(a.threads);
  std::vector<int> ks;
  {
    std::string token;
    for (char c : a.k_values + ",") {
      if (c == ',') {
        if (!token.empty()) {
          try {
            ks.push_back(std::stoi(token));
          } catch (const std::exception&) {
            throw rphgnn::ConfigError("bad --k-values entry: " + token);
          }
          token.clear();
        }
      } else {
        token += c;
      }
    }
  }
  if (ks.empty()) throw rphgnn::ConfigError("--k-values is empty");
  int k_max = 0;
  for (int k : ks) {
    if (k < 1) throw rphgnn::ConfigError("--k-values entries must be >= 1");
    k_max = std::max(k_max, k);
  }

  const std::uint64_t seed = static_cast<std::uint64_t>(a.seed);
  std::vector<rphgnn::GroupTensor> groups(a.groups);
  for (std::size_t gi = 0; gi < a.groups; ++gi) {
    groups[gi].relation_id = "bench-" + std::to_string(gi);
    groups[gi].relation_compact = groups[gi].relation_id;
    for (int k = 0; k < k_max; ++k)
      groups[gi].slabs.push_back(rphgnn::gaussian_matrix(
          a.rows, a.dim,
          rphgnn::derive_seed(seed, "bench-slab",
                              static_cast<std::uint64_t>(gi) * 1000 +
                                  static_cast<std::uint64_t>(k))));
  }

  rphgnn::EncoderConfig enc;
  enc.hidden_dim = a.hidden;
  enc.num_classes = a.classes;
  rphgnn::TrainConfig tc;
  tc.seed = seed;
  rphgnn::BenchResult r =
      rphgnn::bench_epoch_time(groups, enc, tc, ks, a.reps);

  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"iterations", row.iterations}, {"seconds", row.seconds}});
  json out{{"rows", rows},
           {"slope", r.slope},
           {"intercept", r.intercept},
           {"r2", r.r2}};
  const std::string text = out.dump(2) + "\n";
  if (a.out.empty())
    std::cout << text;
  else
    write_text(a.out, text);
  for (const auto& row : r.rows)
    std::fprintf(stderr, "k=%d  %.4fs\n", row.iterations, row.seconds);
  std::fprintf(stderr, "fit seconds ~ %.4f + %.4f*k  (r2 %.4f)\n", r.intercept,
               r.slope, r.r2);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"random-projection heterogeneous graph pipeline"};
  app.require_subcommand(1);

  PrecomputeArgs pa;
  CLI::App* pre = app.add_subcommand(
      "precompute", "collect + squash a graph into a group-tensor archive");
  pre->add_option("graph", pa.graph_dir, "graph directory")->required();
  pre->add_option("--out", pa.out_dir, "output directory");
  pre->add_option("--config", pa.config, "run config JSON");
  pre->add_option("--scheme", pa.scheme, "local | even-odd | two-hop");
  pre->add_option("--iterations", pa.iterations, "propagation rounds K");
  pre->add_option("--psp", pa.p_sp, "sparse projection zero probability");
  pre->add_option("--rp", pa.rp, "projection family: sparse | gaussian");
  pre->add_option("--dim", pa.dim, "random embedding width for featureless types");
  pre->add_option("--relation-cap", pa.relation_cap, "max enumerated relations")
      ->each([&pa](const std::string&) { pa.cap_set = true; });
  pre->add_option("--seed", pa.seed, "master seed");
  pre->add_option("--threads", pa.threads, "worker thread count");

  TrainArgs ta;
  CLI::App* train = app.add_subcommand("train", "fit the encoder on an archive");
  train->add_option("--archive", ta.archive, "archive file")->required();
  train->add_option("--graph", ta.graph_dir, "graph directory (labels, split)")
      ->required();
  train->add_option("--out", ta.out_dir, "output directory");
  train->add_option("--config", ta.config,
                    "run config JSON (default: manifest.json next to archive)");
  train->add_option("--lr", ta.lr, "learning rate");
  train->add_option("--batch-size", ta.batch_size, "mini-batch size");
  train->add_option("--patience", ta.patience, "early-stopping patience");
  train->add_option("--max-epochs", ta.max_epochs, "epoch limit");
  train->add_option("--seed", ta.seed, "master seed");
  train->add_option("--threads", ta.threads, "worker thread count");

  LedgerArgs la;
  CLI::App* led = app.add_subcommand("ledger", "print the provenance ledger");
  led->add_option("graph", la.graph_dir, "graph directory")->required();
  led->add_option("--scheme", la.scheme, "local | even-odd | two-hop");
  led->add_option("--iterations", la.iterations, "propagation rounds K");
  led->add_option("--relation-cap", la.relation_cap, "max enumerated relations")
      ->each([&la](const std::string&) { la.cap_set = true; });
  led->add_option("--target", la.target, "target vertex type (default: graph's)");
  led->add_option("--format", la.format, "markdown | json");
  led->add_option("--out", la.out, "output file (default: stdout)");

  SynthArgs sa;
  CLI::App* syn =
      app.add_subcommand("synth", "generate a synthetic labeled graph");
  syn->add_option("--out", sa.out_dir, "output graph directory")->required();
  syn->add_option("--targets", sa.targets, "target vertex count");
  syn->add_option("--classes", sa.classes, "label count");
  syn->add_option("--signal", sa.signal, "label signal strength in [0,1]");
  syn->add_option("--seed", sa.seed, "generator seed");

  BenchArgs ba;
  CLI::App* ben = app.add_subcommand(
      "bench", "time training epochs against the iteration count");
  ben->add_option("--k-values", ba.k_values, "comma-separated iteration counts");
  ben->add_option("--rows", ba.rows, "synthetic target count");
  ben->add_option("--groups", ba.groups, "synthetic group count");
  ben->add_option("--dim", ba.dim, "synthetic slab width");
  ben->add_option("--hidden", ba.hidden, "encoder hidden width");
  ben->add_option("--classes", ba.classes, "synthetic class count");
  ben->add_option("--reps", ba.reps, "repetitions per point (min taken)");
  ben->add_option("--seed", ba.seed, "generator seed");
  ben->add_option("--out", ba.out, "output JSON file (default: stdout)");
  ben->add_option("--threads", ba.threads, "worker thread count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }

  try {
    if (pre->parsed()) return cmd_precompute(pa);
    if (train->parsed()) return cmd_train(ta);
    if (led->parsed()) return cmd_ledger(la);
    if (syn->parsed()) return cmd_synth(sa);
    if (ben->parsed()) return cmd_bench(ba);
  } catch (const rphgnn::CapError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const rphgnn::FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const rphgnn::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 3;
}
