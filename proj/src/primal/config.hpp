#pragma once

#include <cstdint>
#include <string>

namespace primal {

// Hyperparameters for one run. The paper-scale profile matches the reference
// setting (300-d embeddings, 200-d hidden, 2 layers, dropout 0.2, 200-char
// truncation, batch 8, 20 epochs); the desk profile is sized for fast local
// experiments and is the default.
struct RunConfig {
  std::string profile = "desk";
  int embedding_dim = 32;
  int hidden_dim = 24;
  int layers = 1;
  double dropout = 0.2;
  int truncate_len = 200;
  int batch_size = 8;
  int epochs = 6;
  int min_count = 1;
  uint64_t seed = 42;

  // Adam
  double adam_alpha = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  bool clip_enabled = true;
  double clip_norm = 5.0;

  // Skip-gram embeddings for the UMFS-WE baseline.
  int umfs_window = 2;
  int umfs_negatives = 5;
  int umfs_epochs = 5;
  double umfs_lr = 0.025;

  double heldout_fraction = 0.1;  // skip-thought held-out slice

  static RunConfig desk();
  static RunConfig paper();
  static RunConfig profile_named(const std::string& name);

  // Overlays fields present in a JSON document onto this config.
  void apply_json_text(const std::string& text);
  std::string to_json() const;

  // FNV-1a over the canonical JSON form; stable across runs.
  std::string hash() const;

  void validate() const;
};

extern const char* const kVersion;

}  // namespace primal
