#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "primal/tensor.hpp"

namespace primal {

struct EncoderConfig {
  int vocab_size = 0;
  int embedding_dim = 32;
  int hidden_dim = 24;
  int layers = 1;
  double dropout = 0.2;
  int truncate_len = 200;

  // Concatenated bidirectional width, also the sense-vector dimension.
  int state_dim() const { return 2 * hidden_dim; }
  int pooled_dim() const { return 2 * state_dim(); }  // [h_last; h_bar]
};

// Gate parameter block for one direction of one layer. Gate order in the
// fused matrices is input, forget, cell, output.
struct LstmDirection {
  nd::Tensor w_x;  // input_dim x 4h
  nd::Tensor w_h;  // h x 4h
  nd::Tensor b;    // 1 x 4h
};

struct LstmLayer {
  LstmDirection fwd;
  LstmDirection bwd;
};

struct LstmStack {
  std::vector<LstmLayer> layers;
  int hidden_dim = 0;
};

struct AttentionPool {
  nd::Tensor w_a;  // embedding_dim x state_dim, bilinear score v_e^T W_a h_j
  nd::Tensor w_v;  // pooled_dim x state_dim
};

struct AttnOut {
  nd::Tensor pooled;  // 1 x state_dim, tanh(W_v [h_last; h_bar])
  nd::Tensor alpha;   // 1 x L attention weights
};

// Runs a single unidirectional LSTM pass and returns all hidden states
// (L x h) plus the final cell state row. `reversed` walks the input from the
// last row to the first; outputs stay in input order.
struct LstmPass {
  nd::Tensor states;      // L x h, in input position order
  nd::Tensor last_h;      // 1 x h (final state of the walk)
  nd::Tensor last_c;      // 1 x h
};
LstmPass lstm_run(const LstmDirection& dir, const nd::Tensor& inputs, bool reversed);

// Top-layer bidirectional states (L x 2h). Dropout is applied between layers
// only while training.
nd::Tensor lstm_forward(const LstmStack& stack, const nd::Tensor& inputs, bool train,
                        double dropout_rate, nd::Rng& rng);

AttnOut attention_pool(const AttentionPool& pool, const nd::Tensor& states,
                       const nd::Tensor& v_e);

// Character-sequence encoder shared by the listwise scorers: embedding
// lookup, multi-layer bidirectional LSTM, attention pooling against the
// expression vector.
class Encoder {
 public:
  Encoder() = default;
  Encoder(const EncoderConfig& config, nd::Rng& rng);

  const EncoderConfig& config() const { return config_; }

  // Mean of the character embedding rows of the expression surface (1 x d).
  nd::Tensor expression_vector(std::span<const int> surface) const;

  // Full composition for one sense description; truncates to
  // config.truncate_len.
  nd::Tensor sense_vector(std::span<const int> description, const nd::Tensor& v_e, bool train,
                          nd::Rng& rng) const;

  AttnOut pooled_states(std::span<const int> description, const nd::Tensor& v_e, bool train,
                        nd::Rng& rng) const;

  nd::Tensor& embedding() { return embedding_; }
  const nd::Tensor& embedding() const { return embedding_; }
  LstmStack& stack() { return stack_; }
  AttentionPool& pool() { return pool_; }

  // Stable name -> tensor list for optimizers and checkpoints.
  std::vector<std::pair<std::string, nd::Tensor>> named_params(const std::string& prefix) const;

 private:
  EncoderConfig config_;
  nd::Tensor embedding_;  // V x d
  LstmStack stack_;
  AttentionPool pool_;
};

}  // namespace primal
