#include "primal/skipthought.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "primal/errors.hpp"
#include "primal/optim.hpp"

namespace primal {

using nd::Tensor;

std::vector<SentenceTriple> triples_from_corpus(const std::vector<Expression>& exprs) {
  std::vector<SentenceTriple> out;
  for (const Expression& e : exprs) {
    for (size_t i = 1; i + 1 < e.senses.size(); ++i) {
      out.push_back({e.senses[i - 1].description, e.senses[i].description,
                     e.senses[i + 1].description});
    }
  }
  return out;
}

std::string SkipThoughtReport::to_json() const {
  nlohmann::json j;
  j["heldout_loss"] = heldout_loss;
  j["heldout_perplexity"] = heldout_perplexity;
  return j.dump();
}

namespace {

constexpr double kInitRange = 0.08;

struct CellStep {
  Tensor h;
  Tensor c;
};

CellStep lstm_cell(const Tensor& x_row, const Tensor& w_x, const Tensor& w_h, const Tensor& b,
                   const Tensor& h_prev, const Tensor& c_prev) {
  size_t h = w_h.rows();
  Tensor gates = add(add_rowvec(matmul(x_row, w_x), b), matmul(h_prev, w_h));
  Tensor i = nd::sigmoid(slice_cols(gates, 0, h));
  Tensor f = nd::sigmoid(slice_cols(gates, h, 2 * h));
  Tensor g = nd::tanh(slice_cols(gates, 2 * h, 3 * h));
  Tensor o = nd::sigmoid(slice_cols(gates, 3 * h, 4 * h));
  Tensor c = add(mul(f, c_prev), mul(i, g));
  return {mul(o, nd::tanh(c)), c};
}

}  // namespace

SkipThoughtModel::SkipThoughtModel(int vocab_size, int embedding_dim, int hidden_dim,
                                   int truncate_len, nd::Rng& rng)
    : embedding_dim_(embedding_dim), hidden_dim_(hidden_dim), truncate_len_(truncate_len) {
  if (vocab_size < 2 || embedding_dim < 1 || hidden_dim < 1 || truncate_len < 1)
    throw Error("skipthought: invalid sizes");
  // Sense vectors (encoder states) and expression vectors (mean input
  // embeddings) meet in one cosine, so the two spaces share a dimension.
  if (embedding_dim != hidden_dim)
    throw Error("skipthought: embedding_dim must equal hidden_dim");
  size_t v = static_cast<size_t>(vocab_size);
  size_t d = static_cast<size_t>(embedding_dim);
  size_t h = static_cast<size_t>(hidden_dim);
  embedding_ = Tensor::uniform({v, d}, -kInitRange, kInitRange, rng);
  auto lstm = [&](Tensor& w_x, Tensor& w_h, Tensor& b) {
    w_x = Tensor::uniform({d, 4 * h}, -kInitRange, kInitRange, rng);
    w_h = Tensor::uniform({h, 4 * h}, -kInitRange, kInitRange, rng);
    std::vector<double> bias(4 * h, 0.0);
    for (size_t j = h; j < 2 * h; ++j) bias[j] = 1.0;
    b = Tensor::from({1, 4 * h}, std::move(bias), true);
  };
  lstm(enc_w_x_, enc_w_h_, enc_b_);
  for (Decoder* dec : {&prev_, &next_}) {
    lstm(dec->w_x, dec->w_h, dec->b);
    dec->w_out = Tensor::uniform({h, v}, -kInitRange, kInitRange, rng);
    dec->b_out = Tensor::zeros({1, v}, true);
  }
}

nd::Tensor SkipThoughtModel::encode(std::span<const int> text) const {
  if (text.empty()) throw Error("skipthought encode: empty text");
  size_t limit = std::min(text.size(), static_cast<size_t>(truncate_len_));
  Tensor embedded = embedding_lookup(embedding_, text.subspan(0, limit));
  Tensor h = Tensor::zeros({1, static_cast<size_t>(hidden_dim_)});
  Tensor c = Tensor::zeros({1, static_cast<size_t>(hidden_dim_)});
  for (size_t t = 0; t < limit; ++t) {
    CellStep s = lstm_cell(row(embedded, t), enc_w_x_, enc_w_h_, enc_b_, h, c);
    h = s.h;
    c = s.c;
  }
  return h;
}

nd::Tensor SkipThoughtModel::decoder_loss(const Decoder& dec, const Tensor& h0, const Tensor& c0,
                                          std::span<const int> target) const {
  // Teacher forcing with PAD as the start-of-sequence input; PAD never
  // occurs in corpus text.
  std::vector<int> inputs(target.size());
  inputs[0] = Vocab::kPad;
  for (size_t t = 1; t < target.size(); ++t) inputs[t] = target[t - 1];

  Tensor embedded = embedding_lookup(embedding_, inputs);
  Tensor h = h0;
  Tensor c = c0;
  std::vector<Tensor> rows;
  rows.reserve(target.size());
  for (size_t t = 0; t < target.size(); ++t) {
    CellStep s = lstm_cell(row(embedded, t), dec.w_x, dec.w_h, dec.b, h, c);
    h = s.h;
    c = s.c;
    rows.push_back(h);
  }
  Tensor states = concat_rows(rows);                                   // K x h
  Tensor logits = add_rowvec(matmul(states, dec.w_out), dec.b_out);    // K x V
  Tensor logp = log_softmax_rows(logits);
  Tensor loss = Tensor::scalar(0.0);
  for (size_t t = 0; t < target.size(); ++t) {
    size_t flat = t * static_cast<size_t>(logp.cols()) + static_cast<size_t>(target[t]);
    loss = add(loss, scale(pick(logp, flat), -1.0));
  }
  return loss;
}

nd::Tensor SkipThoughtModel::triple_loss(const SentenceTriple& t) const {
  std::vector<int> cur = encode_text(vocab_, t.current, truncate_len_);
  std::vector<int> prev = encode_text(vocab_, t.prev, truncate_len_);
  std::vector<int> next = encode_text(vocab_, t.next, truncate_len_);

  size_t limit = cur.size();
  Tensor embedded = embedding_lookup(embedding_, cur);
  Tensor h = Tensor::zeros({1, static_cast<size_t>(hidden_dim_)});
  Tensor c = Tensor::zeros({1, static_cast<size_t>(hidden_dim_)});
  for (size_t i = 0; i < limit; ++i) {
    CellStep s = lstm_cell(row(embedded, i), enc_w_x_, enc_w_h_, enc_b_, h, c);
    h = s.h;
    c = s.c;
  }
  return add(decoder_loss(prev_, h, c, prev), decoder_loss(next_, h, c, next));
}

SenseScores SkipThoughtModel::score(const Expression& expr, const Vocab& vocab) const {
  if (expr.senses.size() < 2)
    throw Error("expression '" + expr.id + "' has fewer than 2 senses");
  std::vector<int> surface = encode_text(vocab, expr.surface, truncate_len_);
  Tensor v_e_t = mean_rows(embedding_lookup(embedding_, surface));
  std::vector<double> v_e(v_e_t.data().begin(), v_e_t.data().end());

  double e_norm = 0;
  for (double x : v_e) e_norm += x * x;
  e_norm = std::sqrt(e_norm);

  std::vector<double> scores;
  std::vector<int> flagged;
  scores.reserve(expr.senses.size());
  for (size_t i = 0; i < expr.senses.size(); ++i) {
    std::vector<int> desc = encode_text(vocab, expr.senses[i].description, truncate_len_);
    Tensor enc = encode(desc);
    double dot = 0, n = 0;
    // v_i lives in the encoder state space; v_e in the input embedding
    // space. Cosine needs a common dimension; the embedding and hidden
    // sizes are set equal for this model.
    if (enc.size() != v_e.size())
      throw Error("skipthought: embedding and hidden dimensions differ");
    for (size_t k = 0; k < v_e.size(); ++k) {
      dot += enc.at(k) * v_e[k];
      n += enc.at(k) * enc.at(k);
    }
    n = std::sqrt(n);
    if (n < 1e-12 || e_norm < 1e-12) {
      scores.push_back(0.0);
      flagged.push_back(static_cast<int>(i));
    } else {
      scores.push_back(dot / (n * e_norm));
    }
  }
  return make_sense_scores(expr.id, kName, std::move(scores), std::move(flagged));
}

std::vector<std::pair<std::string, Tensor>> SkipThoughtModel::named_params() const {
  std::vector<std::pair<std::string, Tensor>> out;
  out.emplace_back("embedding", embedding_);
  out.emplace_back("enc.w_x", enc_w_x_);
  out.emplace_back("enc.w_h", enc_w_h_);
  out.emplace_back("enc.b", enc_b_);
  out.emplace_back("dec_prev.w_x", prev_.w_x);
  out.emplace_back("dec_prev.w_h", prev_.w_h);
  out.emplace_back("dec_prev.b", prev_.b);
  out.emplace_back("dec_prev.w_out", prev_.w_out);
  out.emplace_back("dec_prev.b_out", prev_.b_out);
  out.emplace_back("dec_next.w_x", next_.w_x);
  out.emplace_back("dec_next.w_h", next_.w_h);
  out.emplace_back("dec_next.b", next_.b);
  out.emplace_back("dec_next.w_out", next_.w_out);
  out.emplace_back("dec_next.b_out", next_.b_out);
  return out;
}

double SkipThoughtModel::dataset_loss(const std::vector<SentenceTriple>& triples) const {
  double total = 0, chars = 0;
  for (const SentenceTriple& t : triples) {
    total += triple_loss(t).value();
    chars += static_cast<double>(encode_text(vocab_, t.prev, truncate_len_).size() +
                                 encode_text(vocab_, t.next, truncate_len_).size());
  }
  return chars > 0 ? total / chars : 0.0;
}

SkipThoughtReport skipthought_pretrain(SkipThoughtModel& model,
                                       const std::vector<SentenceTriple>& triples,
                                       const RunConfig& config, nd::Rng& rng) {
  if (triples.empty()) throw Error("skipthought_pretrain: empty corpus");

  std::vector<size_t> order(triples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  size_t heldout_n = static_cast<size_t>(static_cast<double>(triples.size()) *
                                         config.heldout_fraction);
  // Degenerate single-triple corpora train on everything.
  if (heldout_n >= triples.size()) heldout_n = triples.size() - 1;
  std::vector<SentenceTriple> heldout, training;
  for (size_t i = 0; i < order.size(); ++i) {
    if (i < order.size() - heldout_n)
      training.push_back(triples[order[i]]);
    else
      heldout.push_back(triples[order[i]]);
  }
  if (heldout.empty()) heldout = training;  // loss curve still well-defined

  auto named = model.named_params();
  std::vector<Tensor> params;
  for (auto& [name, t] : named) params.push_back(t);
  nd::AdamConfig adam_cfg;
  adam_cfg.alpha = config.adam_alpha;
  adam_cfg.beta1 = config.adam_beta1;
  adam_cfg.beta2 = config.adam_beta2;
  adam_cfg.eps = config.adam_eps;
  adam_cfg.clip_enabled = config.clip_enabled;
  adam_cfg.clip_norm = config.clip_norm;
  nd::Adam adam(params, adam_cfg);

  SkipThoughtReport report;
  report.heldout_loss.push_back(model.dataset_loss(heldout));

  std::vector<size_t> train_order(training.size());
  for (size_t i = 0; i < train_order.size(); ++i) train_order[i] = i;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(train_order);
    size_t begin = 0;
    while (begin < train_order.size()) {
      size_t end = std::min(begin + static_cast<size_t>(config.batch_size), train_order.size());
      Tensor batch = Tensor::scalar(0.0);
      for (size_t k = begin; k < end; ++k)
        batch = add(batch, model.triple_loss(training[train_order[k]]));
      batch = scale(batch, 1.0 / static_cast<double>(end - begin));
      nd::backward(batch);
      adam.step();
      begin = end;
    }
    report.heldout_loss.push_back(model.dataset_loss(heldout));
  }
  report.heldout_perplexity = std::exp(report.heldout_loss.back());
  return report;
}

}  // namespace primal
