#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace primal {

struct Sense {
  std::string id;
  std::u32string description;  // Unicode scalar values
  int listed_position = 0;     // 1-based order on the source page
  std::optional<bool> gold_primal;
};

struct Expression {
  std::string id;
  std::u32string surface;
  std::vector<Sense> senses;  // kept sorted by listed_position
  int weak_label_index = -1;  // sense assumed primal under weak supervision
  std::optional<long long> term_frequency;

  size_t sense_count() const { return senses.size(); }
  // Index of the gold primal sense, or -1 when unannotated.
  int gold_index() const;
};

struct CorpusSplit {
  std::vector<Expression> train;
  std::vector<Expression> validation;
  std::vector<Expression> test;

  const std::vector<Expression>& split(const std::string& name) const;
};

struct LoadReport {
  size_t dropped_single_sense = 0;
  size_t loaded = 0;
};

// One JSON record per line: {id, surface, senses:[{id, description,
// listed_position, gold_primal?}], term_frequency?, split?}. Validates
// invariants, sorts senses by listed_position, assigns weak labels, and
// drops (counting them) expressions with fewer than two senses.
std::vector<Expression> load_corpus(const std::string& path, LoadReport* report = nullptr);

// Same file format with a mandatory `split` field per record. Gold labels
// are required on every validation/test expression.
CorpusSplit load_corpus_split(const std::string& path, LoadReport* report = nullptr);

CorpusSplit corpus_split_from_files(const std::string& train_path,
                                    const std::string& validation_path,
                                    const std::string& test_path,
                                    LoadReport* report = nullptr);

std::string corpus_to_jsonl(const CorpusSplit& corpus);
void save_corpus(const CorpusSplit& corpus, const std::string& path);

// Sets weak_label_index to the sense with listed_position 1. Idempotent.
void assign_weak_labels(std::vector<Expression>& exprs);

struct CorpusStats {
  size_t count = 0;
  double mean_senses = 0;
  double mean_description_length = 0;
};

CorpusStats corpus_stats(const std::vector<Expression>& exprs);

class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  Vocab() : chars_{0, 0} {}

  int size() const { return static_cast<int>(chars_.size()); }
  int lookup(char32_t c) const {
    auto it = index_.find(c);
    return it == index_.end() ? kUnk : it->second;
  }
  char32_t at(int idx) const { return chars_.at(static_cast<size_t>(idx)); }
  bool contains(char32_t c) const { return index_.count(c) > 0; }

  // Appends a character with the next free index. No-op if present.
  void add(char32_t c);

  // Characters in index order; entries 0 and 1 are the PAD/UNK placeholders.
  const std::vector<char32_t>& chars() const { return chars_; }

 private:
  std::unordered_map<char32_t, int> index_;
  std::vector<char32_t> chars_;
};

// Builds the character vocabulary from the train split (surfaces and
// descriptions). Characters seen fewer than min_count times map to UNK.
// Index assignment follows first-occurrence order, so the result is a
// deterministic function of the corpus.
Vocab build_vocab(const std::vector<Expression>& train, int min_count = 1);

// Truncates to max_len scalar values and maps unknown characters to UNK.
// No padding is added here.
std::vector<int> encode_text(const Vocab& v, std::u32string_view text, int max_len);

}  // namespace primal
