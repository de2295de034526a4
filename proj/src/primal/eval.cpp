#include "primal/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "primal/errors.hpp"

namespace primal {

using nlohmann::json;

std::vector<RankedExpression> rankings_from_scores(const std::vector<SenseScores>& scores) {
  std::vector<RankedExpression> out;
  out.reserve(scores.size());
  for (const SenseScores& s : scores) out.push_back({s.expr_id, s.ranks});
  return out;
}

void BandingConfig::validate() const {
  if (sense_count_edges.empty()) throw Error("banding: sense_count_edges must be non-empty");
  for (size_t i = 1; i < sense_count_edges.size(); ++i)
    if (sense_count_edges[i] <= sense_count_edges[i - 1])
      throw Error("banding: sense_count_edges must be strictly increasing");
  if (sense_count_edges.front() < 1) throw Error("banding: sense counts start at 1");
  if (desc_len_quantiles < 1) throw Error("banding: desc_len_quantiles must be positive");
}

namespace {

struct Joined {
  const Expression* expr;
  int gold_rank;
};

std::vector<Joined> join(const std::vector<RankedExpression>& rankings,
                         const std::vector<Expression>& exprs) {
  std::unordered_map<std::string, const Expression*> by_id;
  for (const Expression& e : exprs) by_id[e.id] = &e;
  std::vector<Joined> out;
  out.reserve(rankings.size());
  for (const RankedExpression& r : rankings) {
    auto it = by_id.find(r.expr_id);
    if (it == by_id.end()) throw Error("no expression for ranking '" + r.expr_id + "'");
    const Expression& e = *it->second;
    int g = e.gold_index();
    if (g < 0) throw Error("expression '" + e.id + "' lacks a gold label");
    if (r.ranks.size() != e.senses.size())
      throw Error("ranking for '" + e.id + "' does not match its sense count");
    out.push_back({&e, r.ranks.at(static_cast<size_t>(g))});
  }
  if (out.empty()) throw Error("no rankings to evaluate");
  return out;
}

}  // namespace

double precision_at_1(const std::vector<RankedExpression>& rankings,
                      const std::vector<Expression>& exprs) {
  auto joined = join(rankings, exprs);
  size_t hits = 0;
  for (const Joined& j : joined)
    if (j.gold_rank == 1) ++hits;
  return static_cast<double>(hits) / static_cast<double>(joined.size());
}

double mean_average_precision(const std::vector<RankedExpression>& rankings,
                              const std::vector<Expression>& exprs) {
  auto joined = join(rankings, exprs);
  double sum = 0;
  for (const Joined& j : joined) sum += 1.0 / static_cast<double>(j.gold_rank);
  return sum / static_cast<double>(joined.size());
}

double mean_rank(const std::vector<RankedExpression>& rankings,
                 const std::vector<Expression>& exprs) {
  auto joined = join(rankings, exprs);
  double sum = 0;
  for (const Joined& j : joined) sum += static_cast<double>(j.gold_rank);
  return sum / static_cast<double>(joined.size());
}

std::map<std::string, BucketStat> bucket_report(const std::vector<RankedExpression>& rankings,
                                                const std::vector<Expression>& exprs,
                                                const BandingConfig& banding) {
  banding.validate();
  auto joined = join(rankings, exprs);

  struct Acc {
    size_t population = 0;
    size_t hits = 0;
  };
  std::map<std::string, Acc> acc;
  auto feed = [&](const std::string& key, int gold_rank) {
    Acc& a = acc[key];
    ++a.population;
    if (gold_rank == 1) ++a.hits;
  };

  // Sense-count bands; the last edge is open-ended ("7+").
  const auto& edges = banding.sense_count_edges;
  for (const Joined& j : joined) {
    int m = static_cast<int>(j.expr->senses.size());
    std::string key;
    if (m >= edges.back()) {
      key = "senses=" + std::to_string(edges.back()) + "+";
    } else {
      for (size_t b = 0; b + 1 < edges.size(); ++b)
        if (m >= edges[b] && m < edges[b + 1]) {
          key = "senses=" + std::to_string(edges[b]);
          break;
        }
    }
    if (key.empty()) continue;  // below the first edge
    feed(key, j.gold_rank);
  }

  // Gold-description length quantile bands, computed from this corpus.
  std::vector<size_t> lengths;
  lengths.reserve(joined.size());
  for (const Joined& j : joined)
    lengths.push_back(j.expr->senses[static_cast<size_t>(j.expr->gold_index())].description.size());
  std::vector<size_t> sorted = lengths;
  std::sort(sorted.begin(), sorted.end());
  int q = banding.desc_len_quantiles;
  auto quantile_of = [&](size_t len) {
    // index of first element > len gives the rank position
    size_t pos = static_cast<size_t>(std::upper_bound(sorted.begin(), sorted.end(), len) -
                                     sorted.begin());
    int band = static_cast<int>((pos - 1) * static_cast<size_t>(q) / sorted.size()) + 1;
    return std::min(band, q);
  };
  for (size_t i = 0; i < joined.size(); ++i)
    feed("len_q" + std::to_string(quantile_of(lengths[i])), joined[i].gold_rank);

  // Term-frequency log10 bands, only for expressions carrying the field.
  if (banding.tf_bands) {
    for (const Joined& j : joined) {
      if (!j.expr->term_frequency.has_value()) continue;
      long long tf = *j.expr->term_frequency;
      std::string key;
      if (tf == 0) {
        key = "tf=0";
      } else {
        int mag = static_cast<int>(std::floor(std::log10(static_cast<double>(tf))));
        key = "tf=1e" + std::to_string(mag);
      }
      feed(key, j.gold_rank);
    }
  }

  std::map<std::string, BucketStat> out;
  for (const auto& [key, a] : acc) {
    if (a.population == 0) continue;
    out[key] = {a.population, static_cast<double>(a.hits) / static_cast<double>(a.population)};
  }
  return out;
}

EvalReport evaluate(const std::string& model_name,
                    const std::vector<RankedExpression>& rankings,
                    const std::vector<Expression>& exprs, const BandingConfig& banding) {
  EvalReport r;
  r.model = model_name;
  r.n_expressions = rankings.size();
  r.p_at_1 = precision_at_1(rankings, exprs);
  r.map = mean_average_precision(rankings, exprs);
  r.mean_rank = mean_rank(rankings, exprs);
  r.buckets = bucket_report(rankings, exprs, banding);
  return r;
}

std::string EvalReport::to_json() const {
  json j;
  j["model"] = model;
  j["n_expressions"] = n_expressions;
  j["p_at_1"] = p_at_1;
  j["map"] = map;
  j["mean_rank"] = mean_rank;
  json b = json::object();
  for (const auto& [key, stat] : buckets) {
    b[key] = {{"population", stat.population}, {"p_at_1", stat.p_at_1}};
  }
  j["buckets"] = std::move(b);
  return j.dump(2) + "\n";
}

EvalReport EvalReport::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& ex) {
    throw Error(std::string("eval report: bad JSON: ") + ex.what());
  }
  EvalReport r;
  r.model = j.at("model").get<std::string>();
  r.n_expressions = j.at("n_expressions").get<size_t>();
  r.p_at_1 = j.at("p_at_1").get<double>();
  r.map = j.at("map").get<double>();
  r.mean_rank = j.at("mean_rank").get<double>();
  if (j.contains("buckets"))
    for (auto& [key, val] : j.at("buckets").items())
      r.buckets[key] = {val.at("population").get<size_t>(), val.at("p_at_1").get<double>()};
  return r;
}

std::string render_table(const std::vector<EvalReport>& reports) {
  size_t name_w = 5;  // "Model"
  for (const EvalReport& r : reports) name_w = std::max(name_w, r.model.size());
  std::ostringstream out;
  out << std::left;
  auto pad = [&](const std::string& s, size_t w) {
    out << s;
    for (size_t i = s.size(); i < w + 2; ++i) out << ' ';
  };
  pad("Model", name_w);
  pad("P@1", 8);
  pad("MAP", 8);
  out << "Mean Rank\n";
  char buf[64];
  for (const EvalReport& r : reports) {
    pad(r.model, name_w);
    std::snprintf(buf, sizeof(buf), "%.4f", r.p_at_1);
    pad(buf, 8);
    std::snprintf(buf, sizeof(buf), "%.4f", r.map);
    pad(buf, 8);
    std::snprintf(buf, sizeof(buf), "%.3f", r.mean_rank);
    out << buf << "\n";
  }
  return out.str();
}

OverlapReport overlap_report(
    const std::vector<std::pair<std::string, std::vector<RankedExpression>>>& per_model,
    const std::vector<Expression>& exprs) {
  if (per_model.size() < 2) throw Error("overlap_report: need at least 2 models");

  // Correct-at-1 sets, all over the identical expression set.
  std::vector<std::unordered_map<std::string, bool>> correct(per_model.size());
  size_t n = per_model[0].second.size();
  for (size_t k = 0; k < per_model.size(); ++k) {
    const auto& rankings = per_model[k].second;
    if (rankings.size() != n) throw Error("overlap_report: mismatched expression sets");
    auto joined = join(rankings, exprs);
    for (size_t i = 0; i < joined.size(); ++i)
      correct[k][rankings[i].expr_id] = joined[i].gold_rank == 1;
  }
  for (size_t k = 1; k < per_model.size(); ++k)
    for (const auto& [id, c] : correct[0])
      if (!correct[k].count(id)) throw Error("overlap_report: mismatched expression sets");

  OverlapReport report;
  report.n_expressions = n;
  for (const auto& [name, rankings] : per_model) report.models.push_back(name);

  size_t k = per_model.size();
  std::vector<size_t> counts(static_cast<size_t>(1) << k, 0);
  for (const auto& [id, c0] : correct[0]) {
    size_t mask = 0;
    for (size_t m = 0; m < k; ++m)
      if (correct[m][id]) mask |= static_cast<size_t>(1) << m;
    ++counts[mask];
  }
  for (size_t mask = 0; mask < counts.size(); ++mask) {
    OverlapRegion region;
    for (size_t m = 0; m < k; ++m)
      if (mask & (static_cast<size_t>(1) << m)) region.correct_models.push_back(report.models[m]);
    region.count = counts[mask];
    region.fraction = static_cast<double>(counts[mask]) / static_cast<double>(n);
    report.regions.push_back(std::move(region));
  }
  return report;
}

std::string OverlapReport::to_json() const {
  json j;
  j["models"] = models;
  j["n_expressions"] = n_expressions;
  json arr = json::array();
  for (const OverlapRegion& r : regions) {
    json rj;
    rj["correct"] = r.correct_models;
    rj["count"] = r.count;
    rj["fraction"] = r.fraction;
    arr.push_back(std::move(rj));
  }
  j["regions"] = std::move(arr);
  return j.dump(2) + "\n";
}

}  // namespace primal
