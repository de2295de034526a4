#include "primal/models.hpp"

#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "primal/errors.hpp"

namespace primal {

using nlohmann::json;

namespace {

EncoderConfig encoder_config(const RunConfig& c, int vocab_size) {
  EncoderConfig e;
  e.vocab_size = vocab_size;
  e.embedding_dim = c.embedding_dim;
  e.hidden_dim = c.hidden_dim;
  e.layers = c.layers;
  e.dropout = c.dropout;
  e.truncate_len = c.truncate_len;
  return e;
}

json model_config_json(const RunConfig& c) {
  json j;
  j["embedding_dim"] = c.embedding_dim;
  j["hidden_dim"] = c.hidden_dim;
  j["layers"] = c.layers;
  j["dropout"] = c.dropout;
  j["truncate_len"] = c.truncate_len;
  return j;
}

void params_into_checkpoint(const std::vector<std::pair<std::string, nd::Tensor>>& named,
                            Checkpoint& ck) {
  for (const auto& [name, t] : named) {
    std::vector<double> data(t.data().begin(), t.data().end());
    ck.params[name] = {t.shape(), std::move(data)};
  }
}

void params_from_checkpoint(const Checkpoint& ck,
                            const std::vector<std::pair<std::string, nd::Tensor>>& named) {
  if (named.size() != ck.params.size())
    throw Error("checkpoint: parameter count mismatch for model '" + ck.model_kind + "'");
  for (const auto& [name, t] : named) {
    auto it = ck.params.find(name);
    if (it == ck.params.end()) throw Error("checkpoint: missing parameter '" + name + "'");
    const auto& [shape, data] = it->second;
    if (shape != t.shape())
      throw Error("checkpoint: shape mismatch for '" + name + "'");
    nd::Tensor mutable_t = t;
    std::copy(data.begin(), data.end(), mutable_t.mutable_data().begin());
  }
}

RunConfig config_from_model_json(const std::string& text) {
  RunConfig c;
  c.apply_json_text(text);
  return c;
}

}  // namespace

bool Model::known_kind(const std::string& kind) {
  return kind == UmfsModel::kName || kind == SkipThoughtModel::kName ||
         kind == PatternModel::kName || kind == RelGraphModel::kName;
}

const Vocab& Model::vocab() const {
  return std::visit([](const auto& m) -> const Vocab& { return m.vocab(); }, impl_);
}

Model Model::train(const std::string& kind, const CorpusSplit& corpus, const RunConfig& config,
                   std::string* log_json) {
  config.validate();
  if (corpus.train.empty()) throw Error("train: empty train split");
  Vocab vocab = build_vocab(corpus.train, config.min_count);
  nd::Rng rng(config.seed);
  std::string log;

  Model model;
  if (kind == PatternModel::kName) {
    PatternModel m(encoder_config(config, vocab.size()), rng);
    m.vocab() = vocab;
    TrainReport report = train_listwise(m, corpus.train, corpus.validation, config, rng);
    log = report.to_json();
    model = Model(Impl(std::move(m)));
  } else if (kind == RelGraphModel::kName) {
    RelGraphModel m(encoder_config(config, vocab.size()), rng);
    m.vocab() = vocab;
    TrainReport report = train_listwise(m, corpus.train, corpus.validation, config, rng);
    log = report.to_json();
    model = Model(Impl(std::move(m)));
  } else if (kind == SkipThoughtModel::kName) {
    // Hidden size doubles as the sentence-vector size and must match the
    // input embedding dimension for the cosine against v_e.
    SkipThoughtModel m(vocab.size(), config.embedding_dim, config.embedding_dim,
                       config.truncate_len, rng);
    m.vocab() = vocab;
    auto triples = triples_from_corpus(corpus.train);
    SkipThoughtReport report = skipthought_pretrain(m, triples, config, rng);
    log = report.to_json();
    model = Model(Impl(std::move(m)));
  } else if (kind == UmfsModel::kName) {
    UmfsModel m(vocab, config.embedding_dim);
    Rng urng(config.seed);
    UmfsReport report = train_umfs(m, corpus.train, config, urng);
    log = report.to_json();
    model = Model(Impl(std::move(m)));
  } else {
    throw Error("unknown model '" + kind + "' (expected umfs|skipthought|pattern|relgraph)");
  }
  model.kind_ = kind;
  model.config_ = config;
  if (log_json) *log_json = log;
  return model;
}

SenseScores Model::score_expression(const Expression& expr) const {
  return std::visit([&](const auto& m) { return m.score(expr, m.vocab()); }, impl_);
}

std::vector<SenseScores> Model::score_split(const std::vector<Expression>& exprs) const {
  std::vector<SenseScores> out;
  out.reserve(exprs.size());
  for (const Expression& e : exprs) out.push_back(score_expression(e));
  return out;
}

std::vector<RelationEdge> Model::relation_graph(const Expression& expr) const {
  const RelGraphModel* m = std::get_if<RelGraphModel>(&impl_);
  if (!m) throw Error("relation_graph: model '" + kind_ + "' does not induce a graph");
  return m->relation_graph(expr);
}

Checkpoint Model::to_checkpoint() const {
  Checkpoint ck;
  ck.model_kind = kind_;
  ck.vocab = vocab();
  ck.config_json = model_config_json(config_).dump();
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, UmfsModel>) {
          std::vector<size_t> shape{static_cast<size_t>(m.vocab().size()),
                                    static_cast<size_t>(m.dim())};
          ck.params["syn0"] = {shape, m.input_vectors()};
          ck.params["syn1"] = {shape, m.output_vectors()};
        } else {
          params_into_checkpoint(m.named_params(), ck);
        }
      },
      impl_);
  return ck;
}

Model Model::from_checkpoint(const Checkpoint& ck) {
  RunConfig config = config_from_model_json(ck.config_json);
  nd::Rng rng(0);  // parameters are overwritten below
  Model model;
  int vocab_size = ck.vocab.size();
  if (ck.model_kind == PatternModel::kName) {
    PatternModel m(encoder_config(config, vocab_size), rng);
    m.vocab() = ck.vocab;
    params_from_checkpoint(ck, m.named_params());
    model = Model(Impl(std::move(m)));
  } else if (ck.model_kind == RelGraphModel::kName) {
    RelGraphModel m(encoder_config(config, vocab_size), rng);
    m.vocab() = ck.vocab;
    params_from_checkpoint(ck, m.named_params());
    model = Model(Impl(std::move(m)));
  } else if (ck.model_kind == SkipThoughtModel::kName) {
    SkipThoughtModel m(vocab_size, config.embedding_dim, config.embedding_dim,
                       config.truncate_len, rng);
    m.vocab() = ck.vocab;
    params_from_checkpoint(ck, m.named_params());
    model = Model(Impl(std::move(m)));
  } else if (ck.model_kind == UmfsModel::kName) {
    UmfsModel m(ck.vocab, config.embedding_dim);
    auto it0 = ck.params.find("syn0");
    auto it1 = ck.params.find("syn1");
    if (it0 == ck.params.end() || it1 == ck.params.end())
      throw Error("checkpoint: missing umfs parameters");
    m.input_vectors() = it0->second.second;
    m.output_vectors() = it1->second.second;
    model = Model(Impl(std::move(m)));
  } else {
    throw Error("checkpoint: unknown model kind '" + ck.model_kind + "'");
  }
  model.kind_ = ck.model_kind;
  model.config_ = config;
  return model;
}

std::string relation_graph_csv(const Model& model, const std::vector<Expression>& exprs) {
  std::ostringstream out;
  out << "expr_id,from_sense,to_sense,weight\n";
  char buf[64];
  for (const Expression& e : exprs) {
    for (const RelationEdge& edge : model.relation_graph(e)) {
      std::snprintf(buf, sizeof(buf), "%.17g", edge.weight);
      out << e.id << "," << e.senses[static_cast<size_t>(edge.from)].id << ","
          << e.senses[static_cast<size_t>(edge.to)].id << "," << buf << "\n";
    }
  }
  return out.str();
}

}  // namespace primal
