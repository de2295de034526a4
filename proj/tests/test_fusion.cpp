#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "primal/errors.hpp"
#include "primal/fusion.hpp"
#include "primal/rng.hpp"
#include "feasible_sampler.hpp"

using namespace primal;

namespace {

Expression gold_expr(const std::string& id, size_t m, int gold) {
  Expression e;
  e.id = id;
  e.surface = U"xy";
  for (size_t i = 0; i < m; ++i) {
    Sense s;
    s.id = id + "_s" + std::to_string(i + 1);
    s.description = U"d";
    s.listed_position = static_cast<int>(i + 1);
    s.gold_primal = static_cast<int>(i) == gold;
    e.senses.push_back(std::move(s));
  }
  e.weak_label_index = 0;
  return e;
}

}  // namespace

TEST_CASE("mean rank of gold senses averages per-expression gold ranks") {
  std::vector<Expression> exprs = {gold_expr("e1", 4, 0), gold_expr("e2", 4, 1),
                                   gold_expr("e3", 4, 3)};
  std::vector<SenseScores> scores;
  scores.push_back(make_sense_scores("e1", "m", {4, 3, 2, 1}));  // gold rank 1
  scores.push_back(make_sense_scores("e2", "m", {4, 3, 2, 1}));  // gold rank 2
  scores.push_back(make_sense_scores("e3", "m", {1, 2, 3, 0.5}));  // gold rank 4
  CHECK(mean_rank_of_gold(scores, exprs) == doctest::Approx(7.0 / 3.0));

  // order invariance
  std::reverse(scores.begin(), scores.end());
  CHECK(mean_rank_of_gold(scores, exprs) == doctest::Approx(7.0 / 3.0));

  CHECK_THROWS_AS(mean_rank_of_gold({}, exprs), Error);
}

TEST_CASE("mean rank of 1 everywhere gives R = 1") {
  std::vector<Expression> exprs = {gold_expr("e1", 3, 0), gold_expr("e2", 3, 0)};
  std::vector<SenseScores> scores;
  scores.push_back(make_sense_scores("e1", "m", {3, 2, 1}));
  scores.push_back(make_sense_scores("e2", "m", {9, 2, 1}));
  CHECK(mean_rank_of_gold(scores, exprs) == doctest::Approx(1.0));
}

TEST_CASE("lambda = ln(R/(R-1)) with degenerate and error handling") {
  LambdaResult two = lambda_from_mean_rank(2.0);
  CHECK_FALSE(two.degenerate);
  CHECK(two.lambda == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  LambdaResult three = lambda_from_mean_rank(3.0);
  CHECK(three.lambda == doctest::Approx(std::log(1.5)).epsilon(1e-12));

  LambdaResult one = lambda_from_mean_rank(1.0);
  CHECK(one.degenerate);

  CHECK_THROWS_AS(lambda_from_mean_rank(0.9), Error);
}

TEST_CASE("rank transform reproduces the worked example") {
  SenseScores raw = make_sense_scores("e1", "m", {0.4, 0.1, 0.2, 0.3});
  CHECK(raw.ranks == std::vector<int>{1, 4, 3, 2});
  auto t = rank_transform(raw, lambda_from_mean_rank(2.0));
  REQUIRE(t.size() == 4);
  CHECK(t[0] == doctest::Approx(0.533).epsilon(1e-3));
  CHECK(t[1] == doctest::Approx(0.067).epsilon(1e-2));
  CHECK(t[2] == doctest::Approx(0.133).epsilon(1e-2));
  CHECK(t[3] == doctest::Approx(0.267).epsilon(1e-2));
  // exact values are 8/15, 1/15, 2/15, 4/15
  CHECK(t[0] == doctest::Approx(8.0 / 15.0).epsilon(1e-12));
  double sum = t[0] + t[1] + t[2] + t[3];
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rank transform for m = 2 at lambda = ln 2 gives (2/3, 1/3)") {
  SenseScores raw = make_sense_scores("e1", "m", {0.9, 0.1});
  auto t = rank_transform(raw, lambda_from_mean_rank(2.0));
  CHECK(t[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(t[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("degenerate lambda produces a one-hot transform at rank 1") {
  SenseScores raw = make_sense_scores("e1", "m", {0.1, 0.9, 0.5});
  auto t = rank_transform(raw, lambda_from_mean_rank(1.0));
  CHECK(t == std::vector<double>{0.0, 1.0, 0.0});
}

TEST_CASE("rank transform depends on raw scores only through ranks") {
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    size_t m = 2 + rng.index(6);
    std::vector<double> raw(m);
    for (auto& x : raw) x = rng.uniform(-5, 5);
    // strictly monotone map: a*x + tanh(x) with a > 0 keeps order
    double a = 0.5 + rng.unit();
    std::vector<double> mapped(m);
    for (size_t i = 0; i < m; ++i) mapped[i] = a * raw[i] + std::tanh(raw[i]);
    LambdaResult lr = lambda_from_mean_rank(1.2 + 2.0 * rng.unit());
    auto t1 = rank_transform(make_sense_scores("e", "m", raw), lr);
    auto t2 = rank_transform(make_sense_scores("e", "m", mapped), lr);
    for (size_t i = 0; i < m; ++i) CHECK(t1[i] == doctest::Approx(t2[i]).epsilon(1e-12));
  }
}

TEST_CASE("rank transform is a distribution strictly decreasing in rank") {
  Rng rng(78);
  for (int trial = 0; trial < 50; ++trial) {
    size_t m = 2 + rng.index(7);
    std::vector<double> raw(m);
    for (auto& x : raw) x = rng.uniform(-5, 5);
    LambdaResult lr{0.05 + 3.0 * rng.unit(), false};
    SenseScores s = make_sense_scores("e", "m", raw);
    auto t = rank_transform(s, lr);
    double sum = 0;
    for (double x : t) sum += x;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    // sort transformed by the rank of the sense: must strictly decrease
    std::vector<double> by_rank(m);
    for (size_t i = 0; i < m; ++i) by_rank[static_cast<size_t>(s.ranks[i] - 1)] = t[i];
    for (size_t r = 1; r < m; ++r) CHECK(by_rank[r] < by_rank[r - 1]);
  }
}

TEST_CASE("hybrid_combine with weight 1 on one model reproduces its ranking") {
  FusionConfig cfg;
  cfg.models.push_back({"a", 2.0, std::log(2.0), false, 1.0});
  cfg.models.push_back({"b", 2.0, std::log(2.0), false, 0.0});
  SenseScores sa = make_sense_scores("e1", "a", {0.1, 0.9, 0.5});
  SenseScores sb = make_sense_scores("e1", "b", {0.9, 0.1, 0.5});
  FusedExpression fused = hybrid_combine({&sa, &sb}, cfg);
  CHECK(fused.ranks == sa.ranks);
}

TEST_CASE("hybrid_combine preserves an agreed order") {
  FusionConfig cfg;
  cfg.models.push_back({"a", 1.5, std::log(3.0), false, 0.8});
  cfg.models.push_back({"b", 2.5, std::log(2.5 / 1.5), false, 0.6});
  SenseScores sa = make_sense_scores("e1", "a", {0.7, 0.2, 0.1});
  SenseScores sb = make_sense_scores("e1", "b", {0.5, 0.4, 0.3});
  FusedExpression fused = hybrid_combine({&sa, &sb}, cfg);
  CHECK(fused.ranks == std::vector<int>{1, 2, 3});
}

TEST_CASE("hybrid_combine matches hand-computed weighted totals") {
  FusionConfig cfg;
  cfg.models.push_back({"a", 2.0, std::log(2.0), false, 0.6});
  cfg.models.push_back({"b", 3.0, std::log(1.5), false, 0.4});
  SenseScores sa = make_sense_scores("e1", "a", {0.9, 0.1});  // ranks 1,2
  SenseScores sb = make_sense_scores("e1", "b", {0.2, 0.8});  // ranks 2,1
  FusedExpression fused = hybrid_combine({&sa, &sb}, cfg);

  // model a transformed: (2/3, 1/3); model b: lambda = ln 1.5 ->
  // (q, q^2)/(q + q^2) with q = 2/3 -> (0.6, 0.4) reversed by ranks
  double qa1 = 2.0 / 3.0, qa2 = 1.0 / 3.0;
  double qb = std::exp(-std::log(1.5));
  double zb = qb + qb * qb;
  double b_rank1 = qb / zb, b_rank2 = qb * qb / zb;
  double expected0 = 0.6 * qa1 + 0.4 * b_rank2;
  double expected1 = 0.6 * qa2 + 0.4 * b_rank1;
  CHECK(fused.total[0] == doctest::Approx(expected0).epsilon(1e-12));
  CHECK(fused.total[1] == doctest::Approx(expected1).epsilon(1e-12));
}

TEST_CASE("hybrid_combine rejects model set mismatches") {
  FusionConfig cfg;
  cfg.models.push_back({"a", 2.0, std::log(2.0), false, 0.5});
  cfg.models.push_back({"b", 2.0, std::log(2.0), false, 0.5});
  SenseScores sa = make_sense_scores("e1", "a", {0.9, 0.1});
  SenseScores sc = make_sense_scores("e1", "c", {0.9, 0.1});
  CHECK_THROWS_WITH_AS(hybrid_combine({&sa, &sc}, cfg), doctest::Contains("model set mismatch"),
                       Error);
  CHECK_THROWS_AS(hybrid_combine({&sa}, cfg), Error);
}

TEST_CASE("equal transformed vectors keep the argmax under any weights") {
  FusionConfig cfg;
  cfg.models.push_back({"a", 1.7, std::log(1.7 / 0.7), false, 0.9});
  cfg.models.push_back({"b", 1.7, std::log(1.7 / 0.7), false, 0.3});
  SenseScores sa = make_sense_scores("e1", "a", {0.6, 0.3, 0.1});
  SenseScores sb = make_sense_scores("e1", "b", {0.6, 0.3, 0.1});
  FusedExpression fused = hybrid_combine({&sa, &sb}, cfg);
  auto ta = rank_transform(sa, {cfg.models[0].lambda, false});
  for (size_t i = 0; i < 3; ++i)
    CHECK(fused.total[i] == doctest::Approx((0.9 + 0.3) * ta[i]).epsilon(1e-12));
  CHECK(fused.ranks == sa.ranks);
}

TEST_CASE("fit_fusion computes R, lambda and P@1 on the dev split") {
  std::vector<Expression> exprs = {gold_expr("e1", 4, 0), gold_expr("e2", 4, 1)};
  std::vector<SenseScores> model_scores;
  model_scores.push_back(make_sense_scores("e1", "m", {4, 3, 2, 1}));  // gold rank 1
  model_scores.push_back(make_sense_scores("e2", "m", {1, 0.9, 0.8, 0.7}));  // gold rank 2...

  FusionConfig cfg = fit_fusion({{"m", model_scores}}, exprs);
  REQUIRE(cfg.models.size() == 1);
  CHECK(cfg.models[0].mean_rank == doctest::Approx(1.5));
  CHECK(cfg.models[0].lambda == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(cfg.models[0].p_at_1 == doctest::Approx(0.5));
}

TEST_CASE("fusion config serialization round-trips") {
  FusionConfig cfg;
  cfg.models.push_back({"pattern", 1.25, std::log(5.0), false, 0.95});
  cfg.models.push_back({"relgraph", 1.0, 0.0, true, 0.97});
  FusionConfig back = FusionConfig::from_json(cfg.to_json());
  REQUIRE(back.models.size() == 2);
  CHECK(back.models[0].lambda == doctest::Approx(cfg.models[0].lambda));
  CHECK(back.models[1].degenerate);
  CHECK(back.find("relgraph").p_at_1 == doctest::Approx(0.97));
}

// ---- max-entropy machinery ---------------------------------------------

TEST_CASE("solve_exact_lambda satisfies the defining constraint to 1e-10") {
  for (int n : {2, 3, 5, 7, 10, 20}) {
    double upper = (n + 1.0) / 2.0;
    for (double R : {1.05, 1.3, 1.9, 2.8}) {
      if (R >= upper) continue;
      double lambda = solve_exact_lambda(n, R);
      // independent recomputation of the constraint
      double z = 0, zi = 0;
      for (int i = 1; i <= n; ++i) {
        double w = std::exp(-lambda * i);
        z += w;
        zi += i * w;
      }
      CHECK(std::abs(zi / z - R) < 1e-10);
    }
  }
}

TEST_CASE("solve_exact_lambda matches the oracle value at n=7, R=2") {
  // True solution of the exact constraint (bisection oracle): 0.6600583,
  // which sits 0.033 from ln 2 = 0.6931472 - the approximation's gap at
  // this point, verified against the closed form below.
  double lambda = solve_exact_lambda(7, 2.0);
  CHECK(lambda == doctest::Approx(0.6600583380).epsilon(1e-8));
  CHECK(std::abs(lambda - std::log(2.0)) == doctest::Approx(0.0330888).epsilon(1e-4));
}

TEST_CASE("n=2 with R=1.5 sits on the uniform boundary") {
  CHECK(solve_exact_lambda(2, 1.5) == doctest::Approx(0.0));
}

TEST_CASE("solve_exact_lambda rejects infeasible mean ranks") {
  CHECK_THROWS_AS(solve_exact_lambda(2, 1.6), Error);
  CHECK_THROWS_AS(solve_exact_lambda(2, 1.0), Error);
  CHECK_THROWS_AS(solve_exact_lambda(1, 1.2), Error);
  CHECK_THROWS_AS(solve_exact_lambda(5, 0.5), Error);
}

TEST_CASE("exact lambda decreases as R grows at fixed n") {
  double prev = 1e9;
  for (double R = 1.1; R < 3.9; R += 0.2) {
    double lambda = solve_exact_lambda(8, R);
    CHECK(lambda < prev);
    prev = lambda;
  }
}

TEST_CASE("exact lambda converges to ln(R/(R-1)) as n grows") {
  for (double R : {1.5, 2.0, 3.0}) {
    double approx = std::log(R / (R - 1.0));
    double prev_gap = 1e9;
    for (int n : {7, 10, 15, 25, 50}) {
      double gap = std::abs(solve_exact_lambda(n, R) - approx);
      CHECK(gap <= prev_gap + 1e-12);
      prev_gap = gap;
    }
    CHECK(prev_gap < 2e-4);  // n = 50
  }
}

TEST_CASE("maxent distribution at n=3, R=2 is uniform") {
  auto p = maxent_rank_distribution(3, 2.0);
  for (double x : p) CHECK(x == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("maxent distribution satisfies both constraints and beats samples") {
  int n = 4;
  double R = 1.5;
  auto p = maxent_rank_distribution(n, R);
  double sum = 0, expect = 0;
  for (int i = 0; i < n; ++i) {
    sum += p[static_cast<size_t>(i)];
    expect += (i + 1) * p[static_cast<size_t>(i)];
  }
  CHECK(std::abs(sum - 1.0) < 1e-8);
  CHECK(std::abs(expect - R) < 1e-8);

  // geometric shape: p_{i+1}/p_i constant
  double ratio = p[1] / p[0];
  for (int i = 1; i + 1 < n; ++i)
    CHECK(p[static_cast<size_t>(i + 1)] / p[static_cast<size_t>(i)] ==
          doctest::Approx(ratio).epsilon(1e-9));

  double h = shannon_entropy(p);
  Rng rng(123);
  for (int trial = 0; trial < 1000; ++trial) {
    auto q = testutil::random_feasible(n, R, rng);
    CHECK(h >= shannon_entropy(q) - 1e-9);
  }
}

TEST_CASE("approximation residual at lambda=1.2, n=7 is about 1.1e-3") {
  double r = approximation_residual(7, 1.2);
  CHECK(r == doctest::Approx(1.1002175e-3).epsilon(1e-4));
}

TEST_CASE("approximation residual vanishes as lambda grows") {
  CHECK(approximation_residual(7, 50.0) < 1e-100);
  CHECK(approximation_residual(7, 800.0) == 0.0);
  double prev = approximation_residual(7, 0.5);
  for (double lam : {1.0, 2.0, 4.0, 8.0}) {
    double r = approximation_residual(7, lam);
    CHECK(r < prev);
    prev = r;
  }
}

TEST_CASE("approximation residual decreases monotonically in n at fixed lambda") {
  for (double lam : {0.5, 1.0, 2.0}) {
    double prev = 1e9;
    for (int n = 2; n <= 50; ++n) {
      double r = approximation_residual(n, lam);
      CHECK(r < prev);
      prev = r;
    }
  }
}
