#include "rphgnn/synth.hpp"

#include <algorithm>
#include <cmath>

#include "rphgnn/errors.hpp"
#include "rphgnn/graph_io.hpp"
#include "rphgnn/rng.hpp"

namespace rphgnn {

SynthData make_synth(const SynthConfig& cfg) {
  if (cfg.classes < 2) throw ConfigError("synth: need at least 2 classes");
  if (cfg.targets < cfg.classes * 4)
    throw ConfigError("synth: too few target vertices for the class count");
  if (cfg.hubs < cfg.classes) throw ConfigError("synth: need hubs >= classes");
  if (cfg.signal < 0.0 || cfg.signal > 1.0)
    throw ConfigError("synth: signal must lie in [0, 1]");
  if (cfg.tags == 0 || cfg.ctxs == 0)
    throw ConfigError("synth: tag and ctx counts must be positive");

  SynthData data;
  const std::size_t n = cfg.targets;
  data.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    data.labels[i] = static_cast<std::uint32_t>(i % cfg.classes);

  // Class centroids: random directions scaled to a moderate norm, so raw
  // features are informative but noisy at signal = 1.
  Rng feat_rng(derive_seed(cfg.seed, "synth-features"));
  Matrix<float> centroids(cfg.classes, cfg.item_dim);
  for (std::size_t c = 0; c < cfg.classes; ++c) {
    double sq = 0.0;
    for (std::size_t j = 0; j < cfg.item_dim; ++j) {
      const double v = feat_rng.next_normal();
      centroids(c, j) = static_cast<float>(v);
      sq += v * v;
    }
    const float scale = static_cast<float>(2.0 / std::sqrt(sq));
    for (std::size_t j = 0; j < cfg.item_dim; ++j) centroids(c, j) *= scale;
  }
  Matrix<float> item_feat(n, cfg.item_dim);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t c = data.labels[i];
    for (std::size_t j = 0; j < cfg.item_dim; ++j)
      item_feat(i, j) =
          static_cast<float>(cfg.signal) * centroids(c, j) +
          static_cast<float>(feat_rng.next_normal());
  }

  // Hubs are split evenly across classes; each item picks a hub of its own
  // class with probability 0.9 * signal and uniformly otherwise.  At
  // signal = 0 the choice is exactly uniform, removing the structural signal.
  Rng edge_rng(derive_seed(cfg.seed, "synth-edges"));
  const double q_own = 0.9 * cfg.signal;
  const std::size_t hubs_per_class = cfg.hubs / cfg.classes;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> member_pairs;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t c = data.labels[i];
    for (std::size_t m = 0; m < cfg.hubs_per_item; ++m) {
      std::uint32_t hub;
      if (hubs_per_class > 0 && edge_rng.next_double() < q_own) {
        hub = static_cast<std::uint32_t>(c * hubs_per_class +
                                         edge_rng.next_below(hubs_per_class));
      } else {
        hub = static_cast<std::uint32_t>(edge_rng.next_below(cfg.hubs));
      }
      member_pairs.emplace_back(static_cast<std::uint32_t>(i), hub);
    }
  }

  std::vector<std::pair<std::uint32_t, std::uint32_t>> tag_pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t m = 0; m < cfg.tags_per_item; ++m)
      tag_pairs.emplace_back(
          static_cast<std::uint32_t>(edge_rng.next_below(cfg.tags)),
          static_cast<std::uint32_t>(i));

  std::vector<std::pair<std::uint32_t, std::uint32_t>> ctx_pairs;
  for (std::size_t x = 0; x < cfg.ctxs; ++x)
    for (std::size_t m = 0; m < cfg.items_per_ctx; ++m)
      ctx_pairs.emplace_back(static_cast<std::uint32_t>(x),
                             static_cast<std::uint32_t>(edge_rng.next_below(n)));

  data.graph = build_graph(
      {{"item", n}, {"hub", cfg.hubs}, {"tag", cfg.tags}, {"ctx", cfg.ctxs}},
      {{"item", "memberof", "hub", std::move(member_pairs), false},
       {"tag", "tag_of", "item", std::move(tag_pairs), false},
       {"ctx", "ctx_of", "item", std::move(ctx_pairs), false}});

  data.graph.attach_features(data.graph.vertex_type_id("item"),
                             std::move(item_feat));
  data.graph.attach_features(
      data.graph.vertex_type_id("tag"),
      gaussian_matrix(cfg.tags, cfg.tag_dim, derive_seed(cfg.seed, "synth-tag")));
  data.graph.attach_features(
      data.graph.vertex_type_id("ctx"),
      gaussian_matrix(cfg.ctxs, cfg.ctx_dim, derive_seed(cfg.seed, "synth-ctx")));
  // "hub" stays featureless on purpose; the pipeline attaches random
  // embeddings at precompute time.

  std::vector<std::uint32_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);
  Rng split_rng(derive_seed(cfg.seed, "synth-split"));
  for (std::size_t i = n; i > 1; --i)
    std::swap(order[i - 1], order[split_rng.next_below(i)]);
  const std::size_t train_n = n / 2, valid_n = n / 4;
  data.split.train.assign(order.begin(), order.begin() + train_n);
  data.split.valid.assign(order.begin() + train_n,
                          order.begin() + train_n + valid_n);
  data.split.test.assign(order.begin() + train_n + valid_n, order.end());
  return data;
}

void write_synth(const std::string& dir, const SynthConfig& cfg) {
  SynthData data = make_synth(cfg);
  save_graph_dir(dir, data.graph, data.target, &data.labels, &data.split);
}

}  // namespace rphgnn
