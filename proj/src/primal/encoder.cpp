#include "primal/encoder.hpp"

#include <array>

#include "primal/errors.hpp"

namespace primal {

using nd::Tensor;

namespace {

constexpr double kInitRange = 0.08;

LstmDirection init_direction(int input_dim, int hidden_dim, nd::Rng& rng) {
  LstmDirection d;
  size_t in = static_cast<size_t>(input_dim);
  size_t h = static_cast<size_t>(hidden_dim);
  d.w_x = Tensor::uniform({in, 4 * h}, -kInitRange, kInitRange, rng);
  d.w_h = Tensor::uniform({h, 4 * h}, -kInitRange, kInitRange, rng);
  // Zero biases except the forget gate, which starts open.
  std::vector<double> bias(4 * h, 0.0);
  for (size_t j = h; j < 2 * h; ++j) bias[j] = 1.0;
  d.b = Tensor::from({1, 4 * h}, std::move(bias), true);
  return d;
}

}  // namespace

LstmPass lstm_run(const LstmDirection& dir, const nd::Tensor& inputs, bool reversed) {
  if (inputs.shape().size() != 2 || inputs.rows() == 0)
    throw Error("lstm_run: inputs must be a non-empty L x d matrix");
  size_t len = inputs.rows();
  size_t h = dir.w_h.rows();

  // One fused input projection for the whole sequence.
  Tensor xw = add_rowvec(matmul(inputs, dir.w_x), dir.b);

  Tensor h_prev = Tensor::zeros({1, h});
  Tensor c_prev = Tensor::zeros({1, h});
  std::vector<Tensor> states(len);
  for (size_t step = 0; step < len; ++step) {
    size_t t = reversed ? len - 1 - step : step;
    Tensor gates = add(row(xw, t), matmul(h_prev, dir.w_h));
    Tensor i = nd::sigmoid(slice_cols(gates, 0, h));
    Tensor f = nd::sigmoid(slice_cols(gates, h, 2 * h));
    Tensor g = nd::tanh(slice_cols(gates, 2 * h, 3 * h));
    Tensor o = nd::sigmoid(slice_cols(gates, 3 * h, 4 * h));
    Tensor c = add(mul(f, c_prev), mul(i, g));
    Tensor hh = mul(o, nd::tanh(c));
    states[t] = hh;
    h_prev = hh;
    c_prev = c;
  }
  LstmPass out;
  out.states = concat_rows(states);
  out.last_h = h_prev;
  out.last_c = c_prev;
  return out;
}

nd::Tensor lstm_forward(const LstmStack& stack, const nd::Tensor& inputs, bool train,
                        double dropout_rate, nd::Rng& rng) {
  if (stack.layers.empty()) throw Error("lstm_forward: empty stack");
  Tensor x = inputs;
  Tensor top;
  for (size_t l = 0; l < stack.layers.size(); ++l) {
    if (l > 0) x = nd::dropout(x, dropout_rate, train, rng);
    LstmPass f = lstm_run(stack.layers[l].fwd, x, false);
    LstmPass b = lstm_run(stack.layers[l].bwd, x, true);
    std::array<Tensor, 2> parts{f.states, b.states};
    top = concat_cols(parts);
    x = top;
  }
  return top;
}

AttnOut attention_pool(const AttentionPool& pool, const nd::Tensor& states,
                       const nd::Tensor& v_e) {
  if (states.shape().size() != 2 || states.rows() == 0)
    throw Error("attention_pool: states must be a non-empty L x s matrix");
  if (v_e.shape().size() != 2 || v_e.rows() != 1 || v_e.cols() != pool.w_a.rows())
    throw Error("attention_pool: expression vector shape " + nd::shape_str(v_e.shape()) +
                " does not match W_a " + nd::shape_str(pool.w_a.shape()));
  if (pool.w_a.cols() != states.cols())
    throw Error("attention_pool: W_a " + nd::shape_str(pool.w_a.shape()) +
                " does not match states " + nd::shape_str(states.shape()));

  size_t h2 = states.cols();
  // a(v_e, h_j) = v_e^T W_a h_j for every position in one pass.
  Tensor logits = matmul_nt(matmul(v_e, pool.w_a), states);  // 1 x L
  Tensor alpha = softmax_rows(logits);
  Tensor h_bar = matmul(alpha, states);  // 1 x s

  // Final state of a bidirectional pass: forward half of the last row,
  // backward half of the first row.
  Tensor h_last_fwd = slice_cols(row(states, states.rows() - 1), 0, h2 / 2);
  Tensor h_last_bwd = slice_cols(row(states, 0), h2 / 2, h2);
  std::array<Tensor, 3> cat{h_last_fwd, h_last_bwd, h_bar};
  Tensor joined = concat_cols(cat);  // 1 x 2s

  AttnOut out;
  out.pooled = nd::tanh(matmul(joined, pool.w_v));
  out.alpha = alpha;
  return out;
}

Encoder::Encoder(const EncoderConfig& config, nd::Rng& rng) : config_(config) {
  if (config.vocab_size < 2) throw Error("encoder: vocab_size must cover PAD and UNK");
  if (config.embedding_dim < 1 || config.hidden_dim < 1 || config.layers < 1)
    throw Error("encoder: sizes must be positive");
  size_t v = static_cast<size_t>(config.vocab_size);
  size_t d = static_cast<size_t>(config.embedding_dim);
  embedding_ = Tensor::uniform({v, d}, -kInitRange, kInitRange, rng);
  stack_.hidden_dim = config.hidden_dim;
  for (int l = 0; l < config.layers; ++l) {
    int input_dim = l == 0 ? config.embedding_dim : config.state_dim();
    stack_.layers.push_back(
        {init_direction(input_dim, config.hidden_dim, rng),
         init_direction(input_dim, config.hidden_dim, rng)});
  }
  pool_.w_a = Tensor::uniform({d, static_cast<size_t>(config.state_dim())}, -kInitRange,
                              kInitRange, rng);
  pool_.w_v = Tensor::uniform(
      {static_cast<size_t>(config.pooled_dim()), static_cast<size_t>(config.state_dim())},
      -kInitRange, kInitRange, rng);
}

nd::Tensor Encoder::expression_vector(std::span<const int> surface) const {
  if (surface.empty()) throw Error("expression_vector: empty surface");
  return mean_rows(embedding_lookup(embedding_, surface));
}

AttnOut Encoder::pooled_states(std::span<const int> description, const nd::Tensor& v_e,
                               bool train, nd::Rng& rng) const {
  if (description.empty()) throw Error("sense_vector: empty description");
  size_t limit = std::min(description.size(), static_cast<size_t>(config_.truncate_len));
  Tensor embedded = embedding_lookup(embedding_, description.subspan(0, limit));
  Tensor states = lstm_forward(stack_, embedded, train, config_.dropout, rng);
  return attention_pool(pool_, states, v_e);
}

nd::Tensor Encoder::sense_vector(std::span<const int> description, const nd::Tensor& v_e,
                                 bool train, nd::Rng& rng) const {
  return pooled_states(description, v_e, train, rng).pooled;
}

std::vector<std::pair<std::string, Tensor>> Encoder::named_params(
    const std::string& prefix) const {
  std::vector<std::pair<std::string, Tensor>> out;
  out.emplace_back(prefix + ".embedding", embedding_);
  for (size_t l = 0; l < stack_.layers.size(); ++l) {
    const LstmLayer& layer = stack_.layers[l];
    std::string base = prefix + ".lstm.l" + std::to_string(l);
    out.emplace_back(base + ".fwd.w_x", layer.fwd.w_x);
    out.emplace_back(base + ".fwd.w_h", layer.fwd.w_h);
    out.emplace_back(base + ".fwd.b", layer.fwd.b);
    out.emplace_back(base + ".bwd.w_x", layer.bwd.w_x);
    out.emplace_back(base + ".bwd.w_h", layer.bwd.w_h);
    out.emplace_back(base + ".bwd.b", layer.bwd.b);
  }
  out.emplace_back(prefix + ".attn.w_a", pool_.w_a);
  out.emplace_back(prefix + ".attn.w_v", pool_.w_v);
  return out;
}

}  // namespace primal
