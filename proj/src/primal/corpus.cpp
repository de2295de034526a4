#include "primal/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "primal/errors.hpp"
#include "primal/utf8.hpp"

namespace primal {

using nlohmann::json;

int Expression::gold_index() const {
  for (size_t i = 0; i < senses.size(); ++i)
    if (senses[i].gold_primal.value_or(false)) return static_cast<int>(i);
  return -1;
}

const std::vector<Expression>& CorpusSplit::split(const std::string& name) const {
  if (name == "train") return train;
  if (name == "validation") return validation;
  if (name == "test") return test;
  throw Error("unknown split '" + name + "' (expected train|validation|test)");
}

namespace {

Sense parse_sense(const json& j, size_t line) {
  if (!j.is_object()) throw ParseError("sense is not an object", line);
  Sense s;
  if (!j.contains("id") || !j["id"].is_string())
    throw ParseError("sense missing string field 'id'", line);
  s.id = j["id"].get<std::string>();
  if (!j.contains("description") || !j["description"].is_string())
    throw ParseError("sense missing string field 'description'", line);
  s.description = utf8::decode(j["description"].get<std::string>());
  if (utf8::trim(s.description).empty())
    throw ParseError("sense '" + s.id + "' has empty description", line);
  if (!j.contains("listed_position") || !j["listed_position"].is_number_integer())
    throw ParseError("sense missing integer field 'listed_position'", line);
  s.listed_position = j["listed_position"].get<int>();
  if (s.listed_position < 1)
    throw ParseError("listed_position must be >= 1", line);
  if (j.contains("gold_primal")) {
    if (!j["gold_primal"].is_boolean()) throw ParseError("gold_primal must be boolean", line);
    s.gold_primal = j["gold_primal"].get<bool>();
  }
  return s;
}

// Parses and validates one record. Returns the expression with senses sorted
// by listed_position and the weak label assigned.
Expression parse_expression(const json& j, size_t line) {
  if (!j.is_object()) throw ParseError("record is not an object", line);
  Expression e;
  if (!j.contains("id") || !j["id"].is_string())
    throw ParseError("record missing string field 'id'", line);
  e.id = j["id"].get<std::string>();
  if (!j.contains("surface") || !j["surface"].is_string())
    throw ParseError("record missing string field 'surface'", line);
  e.surface = utf8::decode(j["surface"].get<std::string>());
  if (utf8::trim(e.surface).empty()) throw ParseError("empty surface", line);
  if (!j.contains("senses") || !j["senses"].is_array())
    throw ParseError("record missing array field 'senses'", line);
  for (const auto& js : j["senses"]) e.senses.push_back(parse_sense(js, line));
  if (j.contains("term_frequency")) {
    if (!j["term_frequency"].is_number_integer() || j["term_frequency"].get<long long>() < 0)
      throw ParseError("term_frequency must be a non-negative integer", line);
    e.term_frequency = j["term_frequency"].get<long long>();
  }

  // listed_position values must be a permutation of 1..m.
  const size_t m = e.senses.size();
  std::vector<bool> seen(m, false);
  for (const Sense& s : e.senses) {
    if (s.listed_position > static_cast<int>(m) || seen[static_cast<size_t>(s.listed_position - 1)])
      throw ParseError("position permutation violated in expression '" + e.id + "'", line);
    seen[static_cast<size_t>(s.listed_position - 1)] = true;
  }
  std::sort(e.senses.begin(), e.senses.end(),
            [](const Sense& a, const Sense& b) { return a.listed_position < b.listed_position; });

  int golds = 0;
  for (const Sense& s : e.senses)
    if (s.gold_primal.value_or(false)) ++golds;
  if (golds > 1)
    throw ParseError("expression '" + e.id + "' has more than one gold_primal sense", line);

  e.weak_label_index = 0;  // senses sorted: listed_position 1 is first
  return e;
}

std::string split_of(const json& j, size_t line) {
  if (!j.contains("split") || !j["split"].is_string())
    throw ParseError("record missing string field 'split'", line);
  std::string s = j["split"].get<std::string>();
  if (s != "train" && s != "validation" && s != "test")
    throw ParseError("unknown split '" + s + "'", line);
  return s;
}

void for_each_record(const std::string& path,
                     const std::function<void(const json&, size_t)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file: " + path);
  std::string linebuf;
  size_t line = 0;
  while (std::getline(in, linebuf)) {
    ++line;
    if (linebuf.empty()) continue;
    json j;
    try {
      j = json::parse(linebuf);
    } catch (const json::exception& ex) {
      throw ParseError(std::string("bad JSON: ") + ex.what(), line);
    }
    fn(j, line);
  }
}

void require_gold(const std::vector<Expression>& exprs, const std::string& split_name) {
  for (const Expression& e : exprs)
    if (e.gold_index() < 0)
      throw Error("expression '" + e.id + "' in " + split_name + " split lacks a gold label");
}

json sense_to_json(const Sense& s) {
  json j;
  j["id"] = s.id;
  j["description"] = utf8::encode(s.description);
  j["listed_position"] = s.listed_position;
  if (s.gold_primal.has_value()) j["gold_primal"] = *s.gold_primal;
  return j;
}

json expression_to_json(const Expression& e, const char* split) {
  json j;
  j["id"] = e.id;
  j["surface"] = utf8::encode(e.surface);
  json senses = json::array();
  for (const Sense& s : e.senses) senses.push_back(sense_to_json(s));
  j["senses"] = std::move(senses);
  if (e.term_frequency.has_value()) j["term_frequency"] = *e.term_frequency;
  j["split"] = split;
  return j;
}

}  // namespace

std::vector<Expression> load_corpus(const std::string& path, LoadReport* report) {
  std::vector<Expression> out;
  std::set<std::string> ids;
  LoadReport rep;
  for_each_record(path, [&](const json& j, size_t line) {
    Expression e = parse_expression(j, line);
    if (!ids.insert(e.id).second)
      throw ParseError("duplicate expression id '" + e.id + "'", line);
    if (e.senses.size() < 2) {
      ++rep.dropped_single_sense;
      return;
    }
    ++rep.loaded;
    out.push_back(std::move(e));
  });
  if (report) *report = rep;
  return out;
}

CorpusSplit load_corpus_split(const std::string& path, LoadReport* report) {
  CorpusSplit corpus;
  std::set<std::string> ids;
  LoadReport rep;
  for_each_record(path, [&](const json& j, size_t line) {
    Expression e = parse_expression(j, line);
    if (!ids.insert(e.id).second)
      throw ParseError("duplicate expression id '" + e.id + "'", line);
    std::string split = split_of(j, line);
    if (e.senses.size() < 2) {
      ++rep.dropped_single_sense;
      return;
    }
    ++rep.loaded;
    if (split == "train")
      corpus.train.push_back(std::move(e));
    else if (split == "validation")
      corpus.validation.push_back(std::move(e));
    else
      corpus.test.push_back(std::move(e));
  });
  require_gold(corpus.validation, "validation");
  require_gold(corpus.test, "test");
  if (report) *report = rep;
  return corpus;
}

CorpusSplit corpus_split_from_files(const std::string& train_path,
                                    const std::string& validation_path,
                                    const std::string& test_path, LoadReport* report) {
  CorpusSplit corpus;
  LoadReport total;
  LoadReport rep;
  corpus.train = load_corpus(train_path, &rep);
  total.dropped_single_sense += rep.dropped_single_sense;
  total.loaded += rep.loaded;
  corpus.validation = load_corpus(validation_path, &rep);
  total.dropped_single_sense += rep.dropped_single_sense;
  total.loaded += rep.loaded;
  corpus.test = load_corpus(test_path, &rep);
  total.dropped_single_sense += rep.dropped_single_sense;
  total.loaded += rep.loaded;

  // The three files must not share expression ids.
  std::set<std::string> ids;
  for (const auto* split : {&corpus.train, &corpus.validation, &corpus.test})
    for (const Expression& e : *split)
      if (!ids.insert(e.id).second)
        throw Error("expression id '" + e.id + "' appears in more than one split");

  require_gold(corpus.validation, "validation");
  require_gold(corpus.test, "test");
  if (report) *report = total;
  return corpus;
}

std::string corpus_to_jsonl(const CorpusSplit& corpus) {
  std::ostringstream out;
  for (const Expression& e : corpus.train) out << expression_to_json(e, "train").dump() << "\n";
  for (const Expression& e : corpus.validation)
    out << expression_to_json(e, "validation").dump() << "\n";
  for (const Expression& e : corpus.test) out << expression_to_json(e, "test").dump() << "\n";
  return out.str();
}

void save_corpus(const CorpusSplit& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write corpus file: " + path);
  out << corpus_to_jsonl(corpus);
}

void assign_weak_labels(std::vector<Expression>& exprs) {
  for (Expression& e : exprs) {
    int idx = -1;
    for (size_t i = 0; i < e.senses.size(); ++i)
      if (e.senses[i].listed_position == 1) idx = static_cast<int>(i);
    if (idx < 0) throw Error("expression '" + e.id + "' has no sense at listed_position 1");
    e.weak_label_index = idx;
  }
}

CorpusStats corpus_stats(const std::vector<Expression>& exprs) {
  if (exprs.empty()) throw Error("corpus_stats: empty expression list");
  CorpusStats st;
  st.count = exprs.size();
  double sense_sum = 0;
  double len_sum = 0;
  size_t n_senses = 0;
  for (const Expression& e : exprs) {
    sense_sum += static_cast<double>(e.senses.size());
    for (const Sense& s : e.senses) {
      len_sum += static_cast<double>(s.description.size());
      ++n_senses;
    }
  }
  st.mean_senses = sense_sum / static_cast<double>(exprs.size());
  st.mean_description_length = len_sum / static_cast<double>(n_senses);
  return st;
}

void Vocab::add(char32_t c) {
  if (index_.count(c)) return;
  index_[c] = static_cast<int>(chars_.size());
  chars_.push_back(c);
}

Vocab build_vocab(const std::vector<Expression>& train, int min_count) {
  if (min_count < 1) throw Error("build_vocab: min_count must be >= 1");
  std::unordered_map<char32_t, size_t> counts;
  std::vector<char32_t> order;  // first-occurrence order
  auto feed = [&](const std::u32string& text) {
    for (char32_t c : text) {
      auto [it, inserted] = counts.try_emplace(c, 0);
      if (inserted) order.push_back(c);
      ++it->second;
    }
  };
  for (const Expression& e : train) {
    feed(e.surface);
    for (const Sense& s : e.senses) feed(s.description);
  }
  if (order.empty()) throw Error("build_vocab: no training text");
  Vocab v;
  for (char32_t c : order)
    if (counts[c] >= static_cast<size_t>(min_count)) v.add(c);
  return v;
}

std::vector<int> encode_text(const Vocab& v, std::u32string_view text, int max_len) {
  if (max_len < 1) throw Error("encode_text: max_len must be >= 1");
  size_t n = std::min(text.size(), static_cast<size_t>(max_len));
  std::vector<int> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) out.push_back(v.lookup(text[i]));
  return out;
}

}  // namespace primal
