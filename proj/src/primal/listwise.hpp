#pragma once

#include <functional>
#include <string>
#include <vector>

#include "primal/config.hpp"
#include "primal/corpus.hpp"
#include "primal/encoder.hpp"
#include "primal/scores.hpp"
#include "primal/tensor.hpp"

namespace primal {

// Listwise prediction over the senses of one expression: a probability per
// sense, normalized across that expression only.
struct ListwiseOut {
  nd::Tensor log_probs;  // 1 x m
  nd::Tensor probs;      // 1 x m
};

// Scores senses by a learned style/pattern signal: each sense description is
// encoded with the attention-pooled bidirectional LSTM and projected through
// a shared weight vector, then softmax-normalized across the expression.
class PatternModel {
 public:
  static constexpr const char* kName = "pattern";

  PatternModel() = default;
  PatternModel(const EncoderConfig& config, nd::Rng& rng);

  ListwiseOut forward(const Expression& expr, const Vocab& vocab, bool train,
                      nd::Rng& rng) const;
  SenseScores score(const Expression& expr, const Vocab& vocab) const;

  std::vector<std::pair<std::string, nd::Tensor>> named_params() const;
  Encoder& encoder() { return encoder_; }
  const Vocab& vocab() const { return vocab_; }
  Vocab& vocab() { return vocab_; }
  nd::Tensor& score_vector() { return w_p_; }

 private:
  Encoder encoder_;
  nd::Tensor w_p_;  // 1 x state_dim
  Vocab vocab_;
};

struct RelationEdge {
  int from = 0;  // sense indices
  int to = 0;
  double weight = 0;
};

// Scores sense i by its mean bilinear deduction similarity to the other
// senses of the same expression; the bilinear form is asymmetric so the
// induced relation graph is directed.
class RelGraphModel {
 public:
  static constexpr const char* kName = "relgraph";

  RelGraphModel() = default;
  RelGraphModel(const EncoderConfig& config, nd::Rng& rng);

  ListwiseOut forward(const Expression& expr, const Vocab& vocab, bool train,
                      nd::Rng& rng) const;
  SenseScores score(const Expression& expr, const Vocab& vocab) const;

  // Complete directed graph over the senses: weight(i -> j) = sim(v_i, v_j).
  std::vector<RelationEdge> relation_graph(const Expression& expr) const;

  std::vector<std::pair<std::string, nd::Tensor>> named_params() const;
  Encoder& encoder() { return encoder_; }
  const Vocab& vocab() const { return vocab_; }
  Vocab& vocab() { return vocab_; }
  nd::Tensor& bilinear() { return m_; }

 private:
  // Sense vectors for one expression stacked as an m x dim matrix.
  nd::Tensor sense_matrix(const Expression& expr, const Vocab& vocab, bool train,
                          nd::Rng& rng) const;

  Encoder encoder_;
  nd::Tensor m_;  // dim x dim bilinear form, init near identity
  Vocab vocab_;
};

struct TrainReport {
  std::vector<double> train_loss;  // mean per-expression loss per epoch
  std::vector<double> val_p_at_1;  // per epoch
  int best_epoch = -1;             // 0-based
  double best_val_p_at_1 = 0;
  std::string to_json() const;
};

// Weakly supervised training loop shared by the two listwise models:
// cross-entropy against the first-listed sense, Adam over minibatches of
// expressions, best-validation-accuracy parameters retained.
template <typename Model>
TrainReport train_listwise(Model& model, const std::vector<Expression>& train,
                           const std::vector<Expression>& validation, const RunConfig& config,
                           nd::Rng& rng);

double validation_p_at_1(
    const std::vector<Expression>& validation,
    const std::function<SenseScores(const Expression&)>& score_fn);

}  // namespace primal
