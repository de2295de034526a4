#pragma once

#include <map>
#include <string>
#include <vector>

#include "primal/corpus.hpp"
#include "primal/scores.hpp"

namespace primal {

// One evaluated ranking: the 1-based rank of each sense of one expression.
struct RankedExpression {
  std::string expr_id;
  std::vector<int> ranks;
};

std::vector<RankedExpression> rankings_from_scores(const std::vector<SenseScores>& scores);

struct BandingConfig {
  // Sense-count bands: {2,3,4,5,6,7} makes bands 2,3,4,5,6 and 7+.
  std::vector<int> sense_count_edges = {2, 3, 4, 5, 6, 7};
  // Gold-description length quantile count (deciles by default).
  int desc_len_quantiles = 10;
  // Term-frequency bands on a log10 scale, applied when the field is present.
  bool tf_bands = true;

  void validate() const;
};

struct BucketStat {
  size_t population = 0;
  double p_at_1 = 0;
};

struct EvalReport {
  std::string model;
  size_t n_expressions = 0;
  double p_at_1 = 0;
  double map = 0;
  double mean_rank = 0;
  std::map<std::string, BucketStat> buckets;

  std::string to_json() const;
  static EvalReport from_json(const std::string& text);
};

double precision_at_1(const std::vector<RankedExpression>& rankings,
                      const std::vector<Expression>& exprs);
// One relevant sense per expression, so average precision reduces to the
// reciprocal rank of the gold sense.
double mean_average_precision(const std::vector<RankedExpression>& rankings,
                              const std::vector<Expression>& exprs);
double mean_rank(const std::vector<RankedExpression>& rankings,
                 const std::vector<Expression>& exprs);

std::map<std::string, BucketStat> bucket_report(const std::vector<RankedExpression>& rankings,
                                                const std::vector<Expression>& exprs,
                                                const BandingConfig& banding);

EvalReport evaluate(const std::string& model_name,
                    const std::vector<RankedExpression>& rankings,
                    const std::vector<Expression>& exprs, const BandingConfig& banding = {});

// Aligned plain-text comparison with columns P@1, MAP, Mean Rank.
std::string render_table(const std::vector<EvalReport>& reports);

struct OverlapRegion {
  std::vector<std::string> correct_models;  // empty = all models wrong
  size_t count = 0;
  double fraction = 0;
};

struct OverlapReport {
  std::vector<std::string> models;
  size_t n_expressions = 0;
  std::vector<OverlapRegion> regions;  // all 2^k regions, partition of the set

  std::string to_json() const;
};

OverlapReport overlap_report(
    const std::vector<std::pair<std::string, std::vector<RankedExpression>>>& per_model,
    const std::vector<Expression>& exprs);

}  // namespace primal
