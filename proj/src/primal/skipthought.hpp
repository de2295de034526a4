#pragma once

#include <string>
#include <vector>

#include "primal/config.hpp"
#include "primal/corpus.hpp"
#include "primal/scores.hpp"
#include "primal/tensor.hpp"

namespace primal {

// (previous, current, next) sentence triple for encoder-decoder training.
struct SentenceTriple {
  std::u32string prev;
  std::u32string current;
  std::u32string next;
};

// Consecutive sense descriptions of each expression, in listed order, act as
// running text at desk scale.
std::vector<SentenceTriple> triples_from_corpus(const std::vector<Expression>& exprs);

struct SkipThoughtReport {
  std::vector<double> heldout_loss;  // index 0 = before training
  double heldout_perplexity = 0;     // per character, after training
  std::string to_json() const;
};

// Sentence encoder trained by reconstructing the neighboring sentences from
// the current one through two decoders (no attention). The encoder's last
// hidden state is the sentence vector; senses are scored by cosine between
// that vector and the mean input embedding of the expression surface.
class SkipThoughtModel {
 public:
  static constexpr const char* kName = "skipthought";

  SkipThoughtModel() = default;
  SkipThoughtModel(int vocab_size, int embedding_dim, int hidden_dim, int truncate_len,
                   nd::Rng& rng);

  // Last encoder hidden state for a character sequence (1 x h).
  nd::Tensor encode(std::span<const int> text) const;

  // Sum of both decoders' cross-entropies for one triple.
  nd::Tensor triple_loss(const SentenceTriple& t) const;

  SenseScores score(const Expression& expr, const Vocab& vocab) const;

  std::vector<std::pair<std::string, nd::Tensor>> named_params() const;
  const Vocab& vocab() const { return vocab_; }
  Vocab& vocab() { return vocab_; }
  int hidden_dim() const { return hidden_dim_; }
  int truncate_len() const { return truncate_len_; }

  // Mean per-character cross-entropy over a triple list (no grad use).
  double dataset_loss(const std::vector<SentenceTriple>& triples) const;

 private:
  struct Decoder {
    nd::Tensor w_x, w_h, b;      // LSTM cell
    nd::Tensor w_out, b_out;     // projection to vocabulary logits
  };

  nd::Tensor decoder_loss(const Decoder& dec, const nd::Tensor& h0, const nd::Tensor& c0,
                          std::span<const int> target) const;

  int embedding_dim_ = 0;
  int hidden_dim_ = 0;
  int truncate_len_ = 200;
  nd::Tensor embedding_;  // V x d shared by encoder and decoders
  nd::Tensor enc_w_x_, enc_w_h_, enc_b_;
  Decoder prev_, next_;
  Vocab vocab_;

  friend struct SkipThoughtAccess;
};

// Trains on the triples with Adam; the trailing heldout_fraction of a
// seed-shuffled copy is kept out of training for the loss curve.
SkipThoughtReport skipthought_pretrain(SkipThoughtModel& model,
                                       const std::vector<SentenceTriple>& triples,
                                       const RunConfig& config, nd::Rng& rng);

}  // namespace primal
