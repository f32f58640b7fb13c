#include "rphgnn/manifest.hpp"

#include "rphgnn/errors.hpp"
#include "rphgnn/graph_io.hpp"
#include "rphgnn/rng.hpp"

namespace rphgnn {

nlohmann::json manifest_to_json(const RunManifest& m) {
  nlohmann::json j;
  j["graph_hash"] = m.graph_hash;
  j["precompute"] = {{"scheme", scheme_to_string(m.scheme)},
                     {"iterations", m.iterations},
                     {"rp", {{"strategy", rp_strategy_to_string(m.rp_strategy)},
                             {"p_sp", m.p_sp}}},
                     {"embedding_dim", m.embedding_dim},
                     {"relation_cap", m.relation_cap}};
  j["encoder"] = {{"hidden_dim", m.encoder.hidden_dim},
                  {"conv_channels", m.encoder.conv_channels},
                  {"group_mlp_layers", m.encoder.group_mlp_layers},
                  {"fusion_mlp_layers", m.encoder.fusion_mlp_layers},
                  {"dropout_input", m.encoder.dropout_input},
                  {"dropout_hidden", m.encoder.dropout_hidden}};
  j["train"] = {{"lr", m.lr},
                {"batch_size", m.batch_size},
                {"patience", m.patience},
                {"max_epochs", m.max_epochs}};
  j["seed"] = m.seed;
  return j;
}

RunManifest manifest_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("manifest: expected a JSON object");
  RunManifest m;
  try {
    if (j.contains("graph_hash")) m.graph_hash = j.at("graph_hash");
    if (j.contains("precompute")) {
      const auto& p = j.at("precompute");
      if (p.contains("scheme"))
        m.scheme = scheme_from_string(p.at("scheme").get<std::string>());
      if (p.contains("iterations")) m.iterations = p.at("iterations");
      if (p.contains("rp")) {
        const auto& rp = p.at("rp");
        if (rp.contains("strategy"))
          m.rp_strategy =
              rp_strategy_from_string(rp.at("strategy").get<std::string>());
        if (rp.contains("p_sp")) m.p_sp = rp.at("p_sp");
      }
      if (p.contains("embedding_dim")) m.embedding_dim = p.at("embedding_dim");
      if (p.contains("relation_cap")) m.relation_cap = p.at("relation_cap");
    }
    if (j.contains("encoder")) {
      const auto& e = j.at("encoder");
      if (e.contains("hidden_dim")) m.encoder.hidden_dim = e.at("hidden_dim");
      if (e.contains("conv_channels"))
        m.encoder.conv_channels = e.at("conv_channels");
      if (e.contains("group_mlp_layers"))
        m.encoder.group_mlp_layers = e.at("group_mlp_layers");
      if (e.contains("fusion_mlp_layers"))
        m.encoder.fusion_mlp_layers = e.at("fusion_mlp_layers");
      if (e.contains("dropout_input"))
        m.encoder.dropout_input = e.at("dropout_input");
      if (e.contains("dropout_hidden"))
        m.encoder.dropout_hidden = e.at("dropout_hidden");
    }
    if (j.contains("train")) {
      const auto& t = j.at("train");
      if (t.contains("lr")) m.lr = t.at("lr");
      if (t.contains("batch_size")) m.batch_size = t.at("batch_size");
      if (t.contains("patience")) m.patience = t.at("patience");
      if (t.contains("max_epochs")) m.max_epochs = t.at("max_epochs");
    }
    if (j.contains("seed")) m.seed = j.at("seed");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
  return m;
}

std::string manifest_hash(const RunManifest& m) {
  return hash_hex(fnv1a64(manifest_to_json(m).dump()));
}

std::uint64_t rp_seed(const RunManifest& m) { return derive_seed(m.seed, "rp"); }

std::uint64_t embedding_seed(const RunManifest& m, int vertex_type_id) {
  return derive_seed(m.seed, "embeddings",
                     static_cast<std::uint64_t>(vertex_type_id));
}

std::uint64_t train_seed(const RunManifest& m) {
  return derive_seed(m.seed, "train");
}

}  // namespace rphgnn
