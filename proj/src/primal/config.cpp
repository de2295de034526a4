#include "primal/config.hpp"

#include <cstdio>

#include <json.hpp>

#include "primal/errors.hpp"

namespace primal {

using nlohmann::json;

const char* const kVersion = "0.1.0";

RunConfig RunConfig::desk() { return RunConfig{}; }

RunConfig RunConfig::paper() {
  RunConfig c;
  c.profile = "paper";
  c.embedding_dim = 300;
  c.hidden_dim = 200;
  c.layers = 2;
  c.dropout = 0.2;
  c.truncate_len = 200;
  c.batch_size = 8;
  c.epochs = 20;
  return c;
}

RunConfig RunConfig::profile_named(const std::string& name) {
  if (name == "desk") return desk();
  if (name == "paper") return paper();
  throw Error("unknown profile '" + name + "' (expected desk|paper)");
}

void RunConfig::apply_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& ex) {
    throw Error(std::string("config: bad JSON: ") + ex.what());
  }
  if (!j.is_object()) throw Error("config: expected a JSON object");
  auto set_i = [&](const char* k, int& v) {
    if (j.contains(k)) v = j.at(k).get<int>();
  };
  auto set_d = [&](const char* k, double& v) {
    if (j.contains(k)) v = j.at(k).get<double>();
  };
  if (j.contains("profile")) {
    *this = profile_named(j.at("profile").get<std::string>());
  }
  set_i("embedding_dim", embedding_dim);
  set_i("hidden_dim", hidden_dim);
  set_i("layers", layers);
  set_d("dropout", dropout);
  set_i("truncate_len", truncate_len);
  set_i("batch_size", batch_size);
  set_i("epochs", epochs);
  set_i("min_count", min_count);
  if (j.contains("seed")) seed = j.at("seed").get<uint64_t>();
  set_d("adam_alpha", adam_alpha);
  set_d("adam_beta1", adam_beta1);
  set_d("adam_beta2", adam_beta2);
  set_d("adam_eps", adam_eps);
  if (j.contains("clip_enabled")) clip_enabled = j.at("clip_enabled").get<bool>();
  set_d("clip_norm", clip_norm);
  set_i("umfs_window", umfs_window);
  set_i("umfs_negatives", umfs_negatives);
  set_i("umfs_epochs", umfs_epochs);
  set_d("umfs_lr", umfs_lr);
  set_d("heldout_fraction", heldout_fraction);
  validate();
}

std::string RunConfig::to_json() const {
  json j;
  j["profile"] = profile;
  j["embedding_dim"] = embedding_dim;
  j["hidden_dim"] = hidden_dim;
  j["layers"] = layers;
  j["dropout"] = dropout;
  j["truncate_len"] = truncate_len;
  j["batch_size"] = batch_size;
  j["epochs"] = epochs;
  j["min_count"] = min_count;
  j["seed"] = seed;
  j["adam_alpha"] = adam_alpha;
  j["adam_beta1"] = adam_beta1;
  j["adam_beta2"] = adam_beta2;
  j["adam_eps"] = adam_eps;
  j["clip_enabled"] = clip_enabled;
  j["clip_norm"] = clip_norm;
  j["umfs_window"] = umfs_window;
  j["umfs_negatives"] = umfs_negatives;
  j["umfs_epochs"] = umfs_epochs;
  j["umfs_lr"] = umfs_lr;
  j["heldout_fraction"] = heldout_fraction;
  return j.dump();
}

std::string RunConfig::hash() const {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : to_json()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void RunConfig::validate() const {
  if (embedding_dim < 1 || hidden_dim < 1 || layers < 1 || truncate_len < 1 ||
      batch_size < 1 || epochs < 1 || min_count < 1)
    throw Error("config: sizes must be positive");
  if (dropout < 0.0 || dropout >= 1.0) throw Error("config: dropout must lie in [0,1)");
  if (umfs_window < 1 || umfs_negatives < 1 || umfs_epochs < 1)
    throw Error("config: umfs settings must be positive");
  if (heldout_fraction < 0.0 || heldout_fraction >= 1.0)
    throw Error("config: heldout_fraction must lie in [0,1)");
}

}  // namespace primal
