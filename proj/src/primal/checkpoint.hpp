#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "primal/corpus.hpp"

namespace primal {

// Versioned binary parameter container: magic, version, a JSON header
// (model kind, hyperparameters, vocabulary, parameter table) and raw
// little-endian 64-bit float payloads in header order. Identical state
// serializes to identical bytes.
struct Checkpoint {
  static constexpr uint32_t kVersion = 1;

  std::string model_kind;
  std::string config_json;  // model hyperparameters
  Vocab vocab;
  // Parameter name -> (shape, data), serialized sorted by name.
  std::map<std::string, std::pair<std::vector<size_t>, std::vector<double>>> params;

  std::string serialize() const;
  static Checkpoint deserialize(const std::string& bytes);

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);
};

}  // namespace primal
