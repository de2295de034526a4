#pragma once

#include <map>
#include <string>
#include <vector>

#include "primal/corpus.hpp"
#include "primal/scores.hpp"

namespace primal {

// Per-model fusion parameters fitted on the development split.
struct ModelFusion {
  std::string name;
  double mean_rank = 0;   // R: average rank of the gold sense
  double lambda = 0;      // ln(R/(R-1)), +inf handled by `degenerate`
  bool degenerate = false;  // R <= 1 + eps: transform becomes one-hot at rank 1
  double p_at_1 = 0;      // weight in the hybrid sum
};

struct FusionConfig {
  std::vector<ModelFusion> models;

  const ModelFusion& find(const std::string& name) const;
  std::string to_json() const;
  static FusionConfig from_json(const std::string& text);
};

// Average rank of the gold sense over expressions. Every expression needs a
// gold label and a score record.
double mean_rank_of_gold(const std::vector<SenseScores>& scores,
                         const std::vector<Expression>& exprs);

struct LambdaResult {
  double lambda = 0;
  bool degenerate = false;
};

// lambda = ln(R/(R-1)). R below 1 is an impossible mean rank; R within eps
// of 1 maps to the degenerate one-hot transform.
LambdaResult lambda_from_mean_rank(double R, double eps = 1e-6);

// exp(-lambda r_i) / sum_j exp(-lambda r_j) over the record's ranks.
std::vector<double> rank_transform(const SenseScores& raw, const LambdaResult& lambda);

struct FusedExpression {
  std::string expr_id;
  std::map<std::string, std::vector<double>> per_model;  // transformed vectors
  std::vector<double> total;
  std::vector<int> ranks;  // 1-based, from descending total
};

// total_i = sum_k p_k * transformed_k[i]. All models must cover the same
// expression with the same sense count.
FusedExpression hybrid_combine(const std::vector<const SenseScores*>& per_model,
                               const FusionConfig& config);

// Fits R/lambda/P@1 per model on the dev split, in the given model order.
FusionConfig fit_fusion(const std::vector<std::pair<std::string, std::vector<SenseScores>>>&
                            dev_scores_by_model,
                        const std::vector<Expression>& dev_exprs);

std::vector<FusedExpression> fuse_all(
    const std::vector<std::pair<std::string, std::vector<SenseScores>>>& scores_by_model,
    const FusionConfig& config);

std::string fused_to_jsonl(const std::vector<FusedExpression>& fused);
std::vector<FusedExpression> fused_from_jsonl(const std::string& text);

// ---- max-entropy machinery ------------------------------------------------
// The transform above is the closed-form solution of: maximize Shannon
// entropy over rank distributions p_1..p_n subject to sum p_i = 1 and
// sum i*p_i = R. These helpers verify that claim numerically.

// Solves sum_i i*C*exp(-lambda*i) = R exactly by bisection (|residual| <
// 1e-10). Feasible range: 1 < R <= (n+1)/2; R at the upper boundary gives
// lambda = 0 (the uniform distribution).
double solve_exact_lambda(int n, double R);

// The distribution C*exp(-lambda*i) with the exact lambda.
std::vector<double> maxent_rank_distribution(int n, double R);

// The term dropped when approximating the exact constraint with
// lambda = ln(R/(R-1)): n*q^(n+1)*(1-q) / (q - q^(n+1)) with q = exp(-lambda).
double approximation_residual(int n, double lambda);

double shannon_entropy(std::span<const double> p);

}  // namespace primal
