#pragma once

#include <string>
#include <vector>

#include "primal/config.hpp"
#include "primal/corpus.hpp"
#include "primal/rng.hpp"
#include "primal/scores.hpp"

namespace primal {

// Unsupervised most-frequent-sense baseline: sense i is scored by the cosine
// between the mean character embedding of its description and the expression
// vector. Character embeddings come from a skip-gram negative-sampling pass
// over the training text.
class UmfsModel {
 public:
  static constexpr const char* kName = "umfs";

  UmfsModel() = default;
  UmfsModel(Vocab vocab, int dim);

  SenseScores score(const Expression& expr, const Vocab& vocab) const;

  // Mean embedding of a character sequence; returns false when every
  // character is PAD/UNK-free... i.e. when the pooled vector has zero norm.
  std::vector<double> text_vector(std::span<const int> indices) const;

  const Vocab& vocab() const { return vocab_; }
  Vocab& vocab() { return vocab_; }
  int dim() const { return dim_; }
  std::vector<double>& input_vectors() { return syn0_; }
  const std::vector<double>& input_vectors() const { return syn0_; }
  std::vector<double>& output_vectors() { return syn1_; }
  const std::vector<double>& output_vectors() const { return syn1_; }

 private:
  Vocab vocab_;
  int dim_ = 0;
  std::vector<double> syn0_;  // V x dim input vectors (used for scoring)
  std::vector<double> syn1_;  // V x dim output vectors (negative sampling)
};

struct UmfsReport {
  size_t pairs_trained = 0;
  std::string to_json() const;
};

// Skip-gram with negative sampling over the train split (surfaces and
// descriptions as sentences), window umfs_window, umfs_negatives negatives
// per pair, linearly decaying learning rate.
UmfsReport train_umfs(UmfsModel& model, const std::vector<Expression>& train,
                      const RunConfig& config, Rng& rng);

}  // namespace primal
