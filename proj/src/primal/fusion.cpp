#include "primal/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "primal/errors.hpp"

namespace primal {

using nlohmann::json;

const ModelFusion& FusionConfig::find(const std::string& name) const {
  for (const ModelFusion& m : models)
    if (m.name == name) return m;
  throw Error("fusion config has no model '" + name + "'");
}

std::string FusionConfig::to_json() const {
  json arr = json::array();
  for (const ModelFusion& m : models) {
    json j;
    j["name"] = m.name;
    j["mean_rank"] = m.mean_rank;
    j["lambda"] = m.degenerate ? json() : json(m.lambda);
    j["degenerate"] = m.degenerate;
    j["p_at_1"] = m.p_at_1;
    arr.push_back(std::move(j));
  }
  json root;
  root["models"] = std::move(arr);
  return root.dump();
}

FusionConfig FusionConfig::from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& ex) {
    throw Error(std::string("fusion config: bad JSON: ") + ex.what());
  }
  FusionConfig cfg;
  for (const json& j : root.at("models")) {
    ModelFusion m;
    m.name = j.at("name").get<std::string>();
    m.mean_rank = j.at("mean_rank").get<double>();
    m.degenerate = j.at("degenerate").get<bool>();
    m.lambda = m.degenerate ? 0.0 : j.at("lambda").get<double>();
    m.p_at_1 = j.at("p_at_1").get<double>();
    cfg.models.push_back(std::move(m));
  }
  return cfg;
}

namespace {

std::unordered_map<std::string, const Expression*> index_by_id(
    const std::vector<Expression>& exprs) {
  std::unordered_map<std::string, const Expression*> out;
  for (const Expression& e : exprs) out[e.id] = &e;
  return out;
}

int gold_rank(const SenseScores& s, const Expression& e) {
  int g = e.gold_index();
  if (g < 0) throw Error("expression '" + e.id + "' lacks a gold label");
  if (s.ranks.size() != e.senses.size())
    throw Error("score record for '" + e.id + "' does not match its sense count");
  return s.ranks.at(static_cast<size_t>(g));
}

}  // namespace

double mean_rank_of_gold(const std::vector<SenseScores>& scores,
                         const std::vector<Expression>& exprs) {
  if (scores.empty()) throw Error("mean_rank_of_gold: no scores");
  auto by_id = index_by_id(exprs);
  double sum = 0;
  for (const SenseScores& s : scores) {
    auto it = by_id.find(s.expr_id);
    if (it == by_id.end()) throw Error("no expression for score record '" + s.expr_id + "'");
    sum += static_cast<double>(gold_rank(s, *it->second));
  }
  return sum / static_cast<double>(scores.size());
}

LambdaResult lambda_from_mean_rank(double R, double eps) {
  if (R < 1.0) throw Error("mean rank below 1 is impossible");
  if (R <= 1.0 + eps) return {0.0, true};
  return {std::log(R / (R - 1.0)), false};
}

std::vector<double> rank_transform(const SenseScores& raw, const LambdaResult& lambda) {
  std::vector<double> out(raw.ranks.size(), 0.0);
  if (lambda.degenerate) {
    for (size_t i = 0; i < raw.ranks.size(); ++i)
      if (raw.ranks[i] == 1) out[i] = 1.0;
    return out;
  }
  double z = 0;
  for (size_t i = 0; i < raw.ranks.size(); ++i) {
    out[i] = std::exp(-lambda.lambda * static_cast<double>(raw.ranks[i]));
    z += out[i];
  }
  for (double& v : out) v /= z;
  return out;
}

FusedExpression hybrid_combine(const std::vector<const SenseScores*>& per_model,
                               const FusionConfig& config) {
  if (per_model.empty()) throw Error("hybrid_combine: no model scores");
  if (per_model.size() != config.models.size())
    throw Error("hybrid_combine: model set mismatch (" + std::to_string(per_model.size()) +
                " scored vs " + std::to_string(config.models.size()) + " configured)");
  FusedExpression out;
  out.expr_id = per_model[0]->expr_id;
  size_t m = per_model[0]->sense_count();
  out.total.assign(m, 0.0);
  for (size_t k = 0; k < per_model.size(); ++k) {
    const SenseScores& s = *per_model[k];
    const ModelFusion& mf = config.models[k];
    if (s.model != mf.name)
      throw Error("hybrid_combine: model set mismatch ('" + s.model + "' vs '" + mf.name + "')");
    if (s.expr_id != out.expr_id)
      throw Error("hybrid_combine: mixed expressions ('" + s.expr_id + "' vs '" + out.expr_id +
                  "')");
    if (s.sense_count() != m)
      throw Error("hybrid_combine: sense count mismatch for '" + out.expr_id + "'");
    LambdaResult lr{mf.lambda, mf.degenerate};
    std::vector<double> transformed = rank_transform(s, lr);
    for (size_t i = 0; i < m; ++i) out.total[i] += mf.p_at_1 * transformed[i];
    out.per_model[mf.name] = std::move(transformed);
  }
  out.ranks = ranks_from_scores(out.total);
  return out;
}

FusionConfig fit_fusion(const std::vector<std::pair<std::string, std::vector<SenseScores>>>&
                            dev_scores_by_model,
                        const std::vector<Expression>& dev_exprs) {
  if (dev_scores_by_model.empty()) throw Error("fit_fusion: no models");
  auto by_id = index_by_id(dev_exprs);
  FusionConfig cfg;
  for (const auto& [name, scores] : dev_scores_by_model) {
    if (scores.empty()) throw Error("fit_fusion: model '" + name + "' has no dev scores");
    ModelFusion m;
    m.name = name;
    m.mean_rank = mean_rank_of_gold(scores, dev_exprs);
    LambdaResult lr = lambda_from_mean_rank(m.mean_rank);
    m.lambda = lr.lambda;
    m.degenerate = lr.degenerate;
    size_t hits = 0;
    for (const SenseScores& s : scores) {
      auto it = by_id.find(s.expr_id);
      if (it == by_id.end()) throw Error("no expression for score record '" + s.expr_id + "'");
      if (gold_rank(s, *it->second) == 1) ++hits;
    }
    m.p_at_1 = static_cast<double>(hits) / static_cast<double>(scores.size());
    cfg.models.push_back(std::move(m));
  }
  return cfg;
}

std::vector<FusedExpression> fuse_all(
    const std::vector<std::pair<std::string, std::vector<SenseScores>>>& scores_by_model,
    const FusionConfig& config) {
  if (scores_by_model.empty()) throw Error("fuse_all: no models");
  size_t n = scores_by_model[0].second.size();
  for (const auto& [name, scores] : scores_by_model)
    if (scores.size() != n)
      throw Error("fuse_all: model '" + name + "' scored a different expression set");
  std::vector<FusedExpression> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    std::vector<const SenseScores*> per_model;
    per_model.reserve(scores_by_model.size());
    for (const auto& [name, scores] : scores_by_model) per_model.push_back(&scores[i]);
    out.push_back(hybrid_combine(per_model, config));
  }
  return out;
}

std::string fused_to_jsonl(const std::vector<FusedExpression>& fused) {
  std::ostringstream out;
  for (const FusedExpression& f : fused) {
    json j;
    j["expr_id"] = f.expr_id;
    j["per_model"] = f.per_model;
    j["total"] = f.total;
    j["ranks"] = f.ranks;
    out << j.dump() << "\n";
  }
  return out.str();
}

std::vector<FusedExpression> fused_from_jsonl(const std::string& text) {
  std::vector<FusedExpression> out;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& ex) {
      throw ParseError(std::string("bad JSON in fused records: ") + ex.what(), lineno);
    }
    FusedExpression f;
    f.expr_id = j.at("expr_id").get<std::string>();
    f.per_model = j.at("per_model").get<std::map<std::string, std::vector<double>>>();
    f.total = j.at("total").get<std::vector<double>>();
    f.ranks = j.at("ranks").get<std::vector<int>>();
    out.push_back(std::move(f));
  }
  return out;
}

// ---- max-entropy machinery -------------------------------------------------

namespace {

// Expected rank of the distribution proportional to exp(-lambda * i),
// i = 1..n.
double expected_rank(int n, double lambda) {
  double z = 0, zi = 0;
  for (int i = 1; i <= n; ++i) {
    double w = std::exp(-lambda * static_cast<double>(i));
    z += w;
    zi += static_cast<double>(i) * w;
  }
  return zi / z;
}

}  // namespace

double solve_exact_lambda(int n, double R) {
  if (n < 2) throw Error("solve_exact_lambda: need n >= 2");
  double upper = (static_cast<double>(n) + 1.0) / 2.0;
  if (R <= 1.0 || R > upper + 1e-12)
    throw Error("solve_exact_lambda: R outside feasible range (1, " + std::to_string(upper) +
                "]");
  if (std::abs(R - upper) < 1e-12) return 0.0;  // uniform distribution boundary

  // expected_rank is strictly decreasing in lambda, from (n+1)/2 at 0
  // towards 1. Bracket then bisect.
  double lo = 0.0, hi = 1.0;
  while (expected_rank(n, hi) > R) {
    hi *= 2.0;
    if (hi > 1e4) break;  // expected rank is within 1e-10 of 1 long before this
  }
  for (int iter = 0; iter < 500; ++iter) {
    double mid = 0.5 * (lo + hi);
    double r = expected_rank(n, mid);
    if (std::abs(r - R) < 1e-12) return mid;
    if (r > R)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-15 * std::max(1.0, lo)) break;
  }
  double lambda = 0.5 * (lo + hi);
  if (std::abs(expected_rank(n, lambda) - R) > 1e-10)
    throw Error("solve_exact_lambda: bisection failed to converge");
  return lambda;
}

std::vector<double> maxent_rank_distribution(int n, double R) {
  double lambda = solve_exact_lambda(n, R);
  std::vector<double> p(static_cast<size_t>(n));
  double z = 0;
  for (int i = 1; i <= n; ++i) {
    p[static_cast<size_t>(i - 1)] = std::exp(-lambda * static_cast<double>(i));
    z += p[static_cast<size_t>(i - 1)];
  }
  for (double& v : p) v /= z;
  return p;
}

double approximation_residual(int n, double lambda) {
  if (n < 2) throw Error("approximation_residual: need n >= 2");
  double q = std::exp(-lambda);
  double qn1 = std::pow(q, static_cast<double>(n + 1));
  double denom = q - qn1;
  if (denom == 0.0) return 0.0;  // lambda -> +inf limit
  return static_cast<double>(n) * qn1 * (1.0 - q) / denom;
}

double shannon_entropy(std::span<const double> p) {
  double h = 0;
  for (double v : p)
    if (v > 0) h -= v * std::log(v);
  return h;
}

}  // namespace primal
