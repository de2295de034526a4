#pragma once

#include <cstdint>
#include <string>

#include "primal/corpus.hpp"

namespace primal {

// Controls the synthetic corpus generator. Primal sense descriptions open
// with a fixed definitional marker and restate the expression surface;
// every derived sense reuses one content token that also appears in the
// primal description, so both a style cue and a deduction cue are
// learnable. The primal is listed first with probability first_prob.
struct SynthSpec {
  size_t n_train = 2000;
  size_t n_validation = 200;
  size_t n_test = 200;
  int m_min = 3;
  int m_max = 7;
  double first_prob = 0.44;
  int surface_len_min = 2;
  int surface_len_max = 4;
  int filler_len_min = 6;
  int filler_len_max = 14;
  int content_repeat = 3;
  double surface_echo_prob = 0.15;  // derived senses restating the surface
  std::u32string marker = U"«def»";

  static SynthSpec from_json(const std::string& text);
  std::string to_json() const;
};

// Pure function of (spec, seed).
CorpusSplit generate_synthetic(const SynthSpec& spec, uint64_t seed);

}  // namespace primal
