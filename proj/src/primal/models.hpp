#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "primal/checkpoint.hpp"
#include "primal/config.hpp"
#include "primal/corpus.hpp"
#include "primal/listwise.hpp"
#include "primal/skipthought.hpp"
#include "primal/umfs.hpp"

namespace primal {

// The four scorer kinds behind one front door, keyed by the CLI names
// umfs | skipthought | pattern | relgraph.
class Model {
 public:
  using Impl = std::variant<UmfsModel, SkipThoughtModel, PatternModel, RelGraphModel>;

  Model() = default;
  explicit Model(Impl impl) : impl_(std::move(impl)) {}

  static bool known_kind(const std::string& kind);

  // Builds the vocabulary from the train split, trains the requested model,
  // and returns it with a JSON training log.
  static Model train(const std::string& kind, const CorpusSplit& corpus,
                     const RunConfig& config, std::string* log_json);

  const std::string& kind() const { return kind_; }
  const Vocab& vocab() const;

  SenseScores score_expression(const Expression& expr) const;
  std::vector<SenseScores> score_split(const std::vector<Expression>& exprs) const;

  // Only meaningful for relgraph.
  std::vector<RelationEdge> relation_graph(const Expression& expr) const;

  Checkpoint to_checkpoint() const;
  static Model from_checkpoint(const Checkpoint& ck);

  template <typename T>
  const T& as() const {
    return std::get<T>(impl_);
  }
  template <typename T>
  T& as() {
    return std::get<T>(impl_);
  }

 private:
  Impl impl_;
  std::string kind_;
  RunConfig config_;  // hyperparameters used at train time
};

// Edge list document: one `expr_id,from_sense,to_sense,weight` line per
// directed edge.
std::string relation_graph_csv(const Model& model, const std::vector<Expression>& exprs);

}  // namespace primal
