#include "primal/synth.hpp"

#include <algorithm>
#include <cstdio>

#include <json.hpp>

#include "primal/errors.hpp"
#include "primal/rng.hpp"
#include "primal/utf8.hpp"

namespace primal {

using nlohmann::json;

namespace {

// Disjoint character pools keep the cues identifiable: surfaces use capital
// letters, content tokens lower-case letters, filler digits.
constexpr char32_t kNameFirst = U'A', kNameLast = U'T';
constexpr char32_t kContentFirst = U'a', kContentLast = U'z';
constexpr char32_t kFillerFirst = U'0', kFillerLast = U'9';

char32_t pick_char(Rng& rng, char32_t first, char32_t last) {
  return first + static_cast<char32_t>(rng.below(last - first + 1));
}

void append_filler(std::u32string& out, Rng& rng, const SynthSpec& spec) {
  int n = spec.filler_len_min +
          static_cast<int>(rng.below(static_cast<uint64_t>(spec.filler_len_max - spec.filler_len_min + 1)));
  for (int i = 0; i < n; ++i) out.push_back(pick_char(rng, kFillerFirst, kFillerLast));
}

Expression make_expression(const SynthSpec& spec, Rng& rng, const std::string& id) {
  Expression e;
  e.id = id;

  int surface_len = spec.surface_len_min +
                    static_cast<int>(rng.below(
                        static_cast<uint64_t>(spec.surface_len_max - spec.surface_len_min + 1)));
  for (int i = 0; i < surface_len; ++i) e.surface.push_back(pick_char(rng, kNameFirst, kNameLast));

  int m = spec.m_min + static_cast<int>(rng.below(static_cast<uint64_t>(spec.m_max - spec.m_min + 1)));

  // One content token per derived sense; the primal description carries all
  // of them, which is what makes the derived senses "deducible" from it.
  std::vector<char32_t> content(static_cast<size_t>(m - 1));
  for (auto& c : content) c = pick_char(rng, kContentFirst, kContentLast);

  std::vector<std::u32string> descs(static_cast<size_t>(m));
  descs[0] = spec.marker;
  descs[0] += e.surface;
  for (char32_t c : content) descs[0].push_back(c);
  append_filler(descs[0], rng, spec);
  for (int i = 1; i < m; ++i) {
    std::u32string d;
    for (int r = 0; r < spec.content_repeat; ++r) d.push_back(content[static_cast<size_t>(i - 1)]);
    if (rng.chance(spec.surface_echo_prob)) d += e.surface;
    append_filler(d, rng, spec);
    descs[static_cast<size_t>(i)] = std::move(d);
  }

  // descs[0] is the primal. Choose its listed position, then scatter the
  // derived senses over the remaining slots.
  int primal_pos = rng.chance(spec.first_prob) ? 1 : 2 + static_cast<int>(rng.below(static_cast<uint64_t>(m - 1)));
  std::vector<int> slots;
  for (int p = 1; p <= m; ++p)
    if (p != primal_pos) slots.push_back(p);
  rng.shuffle(slots);

  e.senses.resize(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) {
    Sense s;
    s.id = id + "_s" + std::to_string(i + 1);
    s.description = descs[static_cast<size_t>(i)];
    s.listed_position = (i == 0) ? primal_pos : slots[static_cast<size_t>(i - 1)];
    s.gold_primal = (i == 0);
    e.senses[static_cast<size_t>(i)] = std::move(s);
  }
  std::sort(e.senses.begin(), e.senses.end(),
            [](const Sense& a, const Sense& b) { return a.listed_position < b.listed_position; });
  for (size_t i = 0; i < e.senses.size(); ++i)
    if (e.senses[i].listed_position == 1) e.weak_label_index = static_cast<int>(i);
  return e;
}

void validate(const SynthSpec& spec) {
  if (spec.n_train == 0 || spec.n_validation == 0 || spec.n_test == 0)
    throw Error("synth: split sizes must be positive");
  if (spec.m_min < 2 || spec.m_max < spec.m_min) throw Error("synth: invalid sense count range");
  if (spec.first_prob < 0.0 || spec.first_prob > 1.0)
    throw Error("synth: first_prob must lie in [0,1]");
  if (spec.surface_len_min < 1 || spec.surface_len_max < spec.surface_len_min)
    throw Error("synth: invalid surface length range");
  if (spec.filler_len_min < 0 || spec.filler_len_max < spec.filler_len_min)
    throw Error("synth: invalid filler length range");
  if (spec.content_repeat < 1) throw Error("synth: content_repeat must be >= 1");
  if (spec.surface_echo_prob < 0.0 || spec.surface_echo_prob > 1.0)
    throw Error("synth: surface_echo_prob must lie in [0,1]");
  if (spec.marker.empty()) throw Error("synth: marker must be non-empty");
}

}  // namespace

CorpusSplit generate_synthetic(const SynthSpec& spec, uint64_t seed) {
  validate(spec);
  Rng rng(seed);
  CorpusSplit corpus;
  size_t counter = 0;
  auto gen = [&](std::vector<Expression>& out, size_t n) {
    out.reserve(n);
    for (size_t i = 0; i < n; ++i) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "e%06zu", ++counter);
      out.push_back(make_expression(spec, rng, buf));
    }
  };
  gen(corpus.train, spec.n_train);
  gen(corpus.validation, spec.n_validation);
  gen(corpus.test, spec.n_test);
  return corpus;
}

SynthSpec SynthSpec::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& ex) {
    throw Error(std::string("synth spec: bad JSON: ") + ex.what());
  }
  SynthSpec s;
  auto get_u = [&](const char* k, size_t& field) {
    if (j.contains(k)) field = j.at(k).get<size_t>();
  };
  auto get_i = [&](const char* k, int& field) {
    if (j.contains(k)) field = j.at(k).get<int>();
  };
  auto get_d = [&](const char* k, double& field) {
    if (j.contains(k)) field = j.at(k).get<double>();
  };
  get_u("n_train", s.n_train);
  get_u("n_validation", s.n_validation);
  get_u("n_test", s.n_test);
  get_i("m_min", s.m_min);
  get_i("m_max", s.m_max);
  get_d("first_prob", s.first_prob);
  get_i("surface_len_min", s.surface_len_min);
  get_i("surface_len_max", s.surface_len_max);
  get_i("filler_len_min", s.filler_len_min);
  get_i("filler_len_max", s.filler_len_max);
  get_i("content_repeat", s.content_repeat);
  get_d("surface_echo_prob", s.surface_echo_prob);
  if (j.contains("marker")) s.marker = utf8::decode(j.at("marker").get<std::string>());
  return s;
}

std::string SynthSpec::to_json() const {
  json j;
  j["n_train"] = n_train;
  j["n_validation"] = n_validation;
  j["n_test"] = n_test;
  j["m_min"] = m_min;
  j["m_max"] = m_max;
  j["first_prob"] = first_prob;
  j["surface_len_min"] = surface_len_min;
  j["surface_len_max"] = surface_len_max;
  j["filler_len_min"] = filler_len_min;
  j["filler_len_max"] = filler_len_max;
  j["content_repeat"] = content_repeat;
  j["surface_echo_prob"] = surface_echo_prob;
  j["marker"] = utf8::encode(marker);
  return j.dump();
}

}  // namespace primal
