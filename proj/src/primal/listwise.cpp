#include "primal/listwise.hpp"

#include <algorithm>
#include <functional>

#include <json.hpp>

#include "primal/errors.hpp"
#include "primal/optim.hpp"

namespace primal {

using nd::Tensor;

namespace {

void check_rankable(const Expression& expr) {
  if (expr.senses.size() < 2)
    throw Error("expression '" + expr.id + "' has fewer than 2 senses");
}

std::vector<int> encode_desc(const Vocab& vocab, const Sense& s, int truncate_len) {
  return encode_text(vocab, s.description, truncate_len);
}

}  // namespace

PatternModel::PatternModel(const EncoderConfig& config, nd::Rng& rng) : encoder_(config, rng) {
  w_p_ = Tensor::uniform({1, static_cast<size_t>(config.state_dim())}, -0.08, 0.08, rng);
}

ListwiseOut PatternModel::forward(const Expression& expr, const Vocab& vocab, bool train,
                                  nd::Rng& rng) const {
  check_rankable(expr);
  const int truncate = encoder_.config().truncate_len;
  Tensor v_e = encoder_.expression_vector(encode_text(vocab, expr.surface, truncate));
  std::vector<Tensor> sense_vs;
  sense_vs.reserve(expr.senses.size());
  for (const Sense& s : expr.senses)
    sense_vs.push_back(encoder_.sense_vector(encode_desc(vocab, s, truncate), v_e, train, rng));
  Tensor v_mat = concat_rows(sense_vs);            // m x dim
  Tensor logits = matmul_nt(w_p_, v_mat);          // 1 x m
  ListwiseOut out;
  out.log_probs = log_softmax_rows(logits);
  out.probs = softmax_rows(logits);
  return out;
}

SenseScores PatternModel::score(const Expression& expr, const Vocab& vocab) const {
  nd::Rng rng(0);  // eval path draws nothing
  ListwiseOut out = forward(expr, vocab, false, rng);
  std::vector<double> probs(out.probs.data().begin(), out.probs.data().end());
  return make_sense_scores(expr.id, kName, std::move(probs));
}

std::vector<std::pair<std::string, Tensor>> PatternModel::named_params() const {
  auto out = encoder_.named_params("enc");
  out.emplace_back("w_p", w_p_);
  return out;
}

RelGraphModel::RelGraphModel(const EncoderConfig& config, nd::Rng& rng) : encoder_(config, rng) {
  size_t dim = static_cast<size_t>(config.state_dim());
  std::vector<double> m(dim * dim, 0.0);
  for (size_t i = 0; i < dim; ++i) m[i * dim + i] = 1.0;
  for (double& v : m) v += rng.uniform(-0.01, 0.01);
  m_ = Tensor::from({dim, dim}, std::move(m), true);
}

nd::Tensor RelGraphModel::sense_matrix(const Expression& expr, const Vocab& vocab, bool train,
                                       nd::Rng& rng) const {
  const int truncate = encoder_.config().truncate_len;
  Tensor v_e = encoder_.expression_vector(encode_text(vocab, expr.surface, truncate));
  std::vector<Tensor> sense_vs;
  sense_vs.reserve(expr.senses.size());
  for (const Sense& s : expr.senses)
    sense_vs.push_back(encoder_.sense_vector(encode_desc(vocab, s, truncate), v_e, train, rng));
  return concat_rows(sense_vs);
}

ListwiseOut RelGraphModel::forward(const Expression& expr, const Vocab& vocab, bool train,
                                   nd::Rng& rng) const {
  check_rankable(expr);
  size_t m = expr.senses.size();
  Tensor v_mat = sense_matrix(expr, vocab, train, rng);  // m x dim
  Tensor sim = matmul_nt(matmul(v_mat, m_), v_mat);      // m x m, sim(i,j) = v_i^T M v_j
  // xi_i = mean over j != i of sim(i, j)
  Tensor off_diag = add(rows_sum(sim), scale(take_diag(sim), -1.0));
  Tensor xi = scale(off_diag, 1.0 / static_cast<double>(m - 1));  // m x 1
  Tensor logits = transpose(xi);                                  // 1 x m
  ListwiseOut out;
  out.log_probs = log_softmax_rows(logits);
  out.probs = softmax_rows(logits);
  return out;
}

SenseScores RelGraphModel::score(const Expression& expr, const Vocab& vocab) const {
  nd::Rng rng(0);
  ListwiseOut out = forward(expr, vocab, false, rng);
  std::vector<double> probs(out.probs.data().begin(), out.probs.data().end());
  return make_sense_scores(expr.id, kName, std::move(probs));
}

std::vector<RelationEdge> RelGraphModel::relation_graph(const Expression& expr) const {
  check_rankable(expr);
  nd::Rng rng(0);
  Tensor v_mat = sense_matrix(expr, vocab_, false, rng);
  Tensor sim = matmul_nt(matmul(v_mat, m_), v_mat);
  size_t m = expr.senses.size();
  std::vector<RelationEdge> edges;
  edges.reserve(m * (m - 1));
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < m; ++j)
      if (i != j)
        edges.push_back({static_cast<int>(i), static_cast<int>(j), sim.at(i * m + j)});
  return edges;
}

std::vector<std::pair<std::string, Tensor>> RelGraphModel::named_params() const {
  auto out = encoder_.named_params("enc");
  out.emplace_back("m_bilinear", m_);
  return out;
}

std::string TrainReport::to_json() const {
  nlohmann::json j;
  j["train_loss"] = train_loss;
  j["val_p_at_1"] = val_p_at_1;
  j["best_epoch"] = best_epoch;
  j["best_val_p_at_1"] = best_val_p_at_1;
  return j.dump();
}

double validation_p_at_1(const std::vector<Expression>& validation,
                         const std::function<SenseScores(const Expression&)>& score_fn) {
  if (validation.empty()) throw Error("validation split is empty");
  size_t hits = 0;
  for (const Expression& e : validation) {
    // Gold labels when present, weak labels otherwise.
    int target = e.gold_index() >= 0 ? e.gold_index() : e.weak_label_index;
    SenseScores s = score_fn(e);
    if (s.ranks.at(static_cast<size_t>(target)) == 1) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(validation.size());
}

template <typename Model>
TrainReport train_listwise(Model& model, const std::vector<Expression>& train,
                           const std::vector<Expression>& validation, const RunConfig& config,
                           nd::Rng& rng) {
  if (train.empty()) throw Error("train_listwise: no trainable expressions");
  for (const Expression& e : train) check_rankable(e);

  auto named = model.named_params();
  std::vector<Tensor> params;
  params.reserve(named.size());
  for (auto& [name, t] : named) params.push_back(t);

  nd::AdamConfig adam_cfg;
  adam_cfg.alpha = config.adam_alpha;
  adam_cfg.beta1 = config.adam_beta1;
  adam_cfg.beta2 = config.adam_beta2;
  adam_cfg.eps = config.adam_eps;
  adam_cfg.clip_enabled = config.clip_enabled;
  adam_cfg.clip_norm = config.clip_norm;
  nd::Adam adam(params, adam_cfg);

  const Vocab& vocab = model.vocab();
  TrainReport report;
  std::vector<std::vector<double>> best_params;
  std::vector<size_t> order(train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0;
    size_t batch_begin = 0;
    while (batch_begin < order.size()) {
      size_t batch_end = std::min(batch_begin + static_cast<size_t>(config.batch_size),
                                  order.size());
      std::vector<Tensor> losses;
      losses.reserve(batch_end - batch_begin);
      for (size_t k = batch_begin; k < batch_end; ++k) {
        const Expression& e = train[order[k]];
        ListwiseOut out = model.forward(e, vocab, true, rng);
        losses.push_back(
            scale(pick(out.log_probs, static_cast<size_t>(e.weak_label_index)), -1.0));
      }
      Tensor batch_loss = losses[0];
      for (size_t k = 1; k < losses.size(); ++k) batch_loss = add(batch_loss, losses[k]);
      batch_loss = scale(batch_loss, 1.0 / static_cast<double>(losses.size()));
      loss_sum += batch_loss.value() * static_cast<double>(losses.size());
      nd::backward(batch_loss);
      adam.step();
      batch_begin = batch_end;
    }
    report.train_loss.push_back(loss_sum / static_cast<double>(order.size()));

    double p1 = validation_p_at_1(
        validation, [&](const Expression& e) { return model.score(e, vocab); });
    report.val_p_at_1.push_back(p1);
    if (report.best_epoch < 0 || p1 > report.best_val_p_at_1) {
      report.best_epoch = epoch;
      report.best_val_p_at_1 = p1;
      best_params.clear();
      for (Tensor& p : params)
        best_params.emplace_back(p.data().begin(), p.data().end());
    }
  }

  // Keep the parameters from the best validation epoch.
  for (size_t i = 0; i < params.size(); ++i)
    std::copy(best_params[i].begin(), best_params[i].end(), params[i].mutable_data().begin());
  return report;
}

template TrainReport train_listwise<PatternModel>(PatternModel&, const std::vector<Expression>&,
                                                  const std::vector<Expression>&,
                                                  const RunConfig&, nd::Rng&);
template TrainReport train_listwise<RelGraphModel>(RelGraphModel&,
                                                   const std::vector<Expression>&,
                                                   const std::vector<Expression>&,
                                                   const RunConfig&, nd::Rng&);

}  // namespace primal
