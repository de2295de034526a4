#include <doctest.h>

#include <cmath>

#include "primal/errors.hpp"
#include "primal/optim.hpp"
#include "primal/tensor.hpp"

using namespace primal;
using nd::Tensor;

TEST_CASE("softmax of a constant row is uniform and rows sum to 1") {
  Tensor x = Tensor::from({1, 3}, {0, 0, 0});
  Tensor y = nd::softmax_rows(x);
  for (size_t i = 0; i < 3; ++i) CHECK(y.at(i) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  nd::Rng rng(5);
  Tensor r = Tensor::uniform({4, 6}, -3, 3, rng, false);
  Tensor s = nd::softmax_rows(r);
  for (size_t i = 0; i < 4; ++i) {
    double row_sum = 0;
    for (size_t j = 0; j < 6; ++j) row_sum += s.at(i * 6 + j);
    CHECK(std::abs(row_sum - 1.0) < 1e-12);
  }
}

TEST_CASE("softmax is invariant to shifting a row by a constant") {
  Tensor x = Tensor::from({1, 4}, {0.3, -1.2, 2.0, 0.0});
  Tensor xs = Tensor::from({1, 4}, {0.3 + 17, -1.2 + 17, 2.0 + 17, 0.0 + 17});
  Tensor a = nd::softmax_rows(x);
  Tensor b = nd::softmax_rows(xs);
  for (size_t i = 0; i < 4; ++i) CHECK(std::abs(a.at(i) - b.at(i)) < 1e-9);
}

TEST_CASE("tanh(0) is 0") {
  CHECK(nd::tanh(Tensor::scalar(0.0)).value() == 0.0);
}

TEST_CASE("matmul matches hand arithmetic for (2x3)x(3x1)") {
  Tensor a = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor b = Tensor::from({3, 1}, {7, 8, 9});
  Tensor c = nd::matmul(a, b);
  // row0: 1*7 + 2*8 + 3*9 = 50; row1: 4*7 + 5*8 + 6*9 = 122
  CHECK(c.at(0) == doctest::Approx(50));
  CHECK(c.at(1) == doctest::Approx(122));
}

TEST_CASE("ops report shape mismatches with op name and shapes") {
  Tensor a = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor b = Tensor::from({4, 1}, {1, 2, 3, 4});
  try {
    nd::matmul(a, b);
    FAIL("expected Error");
  } catch (const Error& e) {
    std::string msg = e.what();
    CHECK(msg.find("matmul") != std::string::npos);
    CHECK(msg.find("(2x3)") != std::string::npos);
    CHECK(msg.find("(4x1)") != std::string::npos);
  }
  CHECK_THROWS_AS(nd::add(a, b), Error);
}

TEST_CASE("backward of sum gives unit gradients") {
  Tensor x = Tensor::from({3}, {1, 2, 3}, true);
  nd::backward(nd::sum(x));
  REQUIRE(x.has_grad());
  for (size_t i = 0; i < 3; ++i) CHECK(x.grad()[i] == doctest::Approx(1.0));
}

TEST_CASE("backward of x*x at x=3 gives 6") {
  Tensor x = Tensor::scalar(3.0, true);
  nd::backward(nd::mul(x, x));
  CHECK(x.grad()[0] == doctest::Approx(6.0));
}

TEST_CASE("gradients accumulate across multiple uses of one node") {
  Tensor x = Tensor::from({2}, {1, 2}, true);
  Tensor y = nd::add(x, x);
  nd::backward(nd::sum(y));
  CHECK(x.grad()[0] == doctest::Approx(2.0));
  CHECK(x.grad()[1] == doctest::Approx(2.0));
}

TEST_CASE("backward rejects non-scalar loss") {
  Tensor x = Tensor::from({2}, {1, 2}, true);
  CHECK_THROWS_AS(nd::backward(nd::add(x, x)), Error);
}

TEST_CASE("a small random network passes the finite-difference check") {
  nd::Rng rng(17);
  Tensor x = Tensor::uniform({1, 3}, -1, 1, rng, false);
  Tensor w1 = Tensor::uniform({3, 4}, -1, 1, rng);
  Tensor b1 = Tensor::uniform({1, 4}, -0.5, 0.5, rng);
  Tensor w2 = Tensor::uniform({4, 2}, -1, 1, rng);
  Tensor b2 = Tensor::uniform({1, 2}, -0.5, 0.5, rng);
  Tensor w3 = Tensor::uniform({2, 1}, -1, 1, rng);
  std::vector<Tensor> params{w1, b1, w2, b2, w3};
  auto f = [&]() {
    Tensor h1 = nd::tanh(nd::add(nd::matmul(x, w1), b1));
    Tensor h2 = nd::sigmoid(nd::add(nd::matmul(h1, w2), b2));
    return nd::sum(nd::matmul(h2, w3));
  };
  auto report = nd::grad_check(f, params, 1e-5, 1e-4);
  CHECK(report.pass);
  CHECK(report.max_rel_err < 1e-4);
}

TEST_CASE("grad_check on a quadratic form is nearly exact") {
  nd::Rng rng(23);
  Tensor x = Tensor::uniform({1, 3}, -1, 1, rng);
  Tensor a = Tensor::uniform({3, 3}, -1, 1, rng, false);
  std::vector<Tensor> params{x};
  auto f = [&]() { return nd::sum(nd::matmul_nt(nd::matmul(x, a), x)); };
  auto report = nd::grad_check(f, params, 1e-5, 1e-8);
  CHECK(report.max_rel_err < 1e-8);
}

TEST_CASE("grad_check of a constant function reports zero error") {
  nd::Rng rng(29);
  Tensor x = Tensor::uniform({2, 2}, -1, 1, rng);
  std::vector<Tensor> params{x};
  auto f = [&]() { return nd::scale(nd::sum(x), 0.0); };
  auto report = nd::grad_check(f, params, 1e-5, 1e-8);
  CHECK(report.max_rel_err < 1e-8);
}

TEST_CASE("grad_check covers every published op") {
  nd::Rng rng(31);
  Tensor x = Tensor::uniform({3, 4}, -1, 1, rng);
  Tensor y = Tensor::uniform({3, 4}, -1, 1, rng);
  Tensor sq = Tensor::uniform({3, 3}, -1, 1, rng);
  std::vector<Tensor> params{x, y, sq};
  auto f = [&]() {
    Tensor a = nd::mul(nd::add(x, y), nd::sigmoid(x));
    Tensor b = nd::softmax_rows(a);
    Tensor c = nd::log(nd::add(nd::exp(nd::scale(b, 0.1)), nd::mul(y, y)));
    Tensor d = nd::concat_cols(std::vector<Tensor>{nd::rows_sum(c), nd::take_diag(sq)});
    Tensor e = nd::transpose(nd::slice_cols(d, 0, 2));
    Tensor g = nd::add(nd::mean_rows(e), nd::row(e, 1));
    return nd::add(nd::mean(g), nd::sum(nd::log_softmax_rows(nd::matmul_nt(c, c))));
  };
  auto report = nd::grad_check(f, params, 1e-5, 1e-4);
  CHECK(report.pass);
}

TEST_CASE("embedding_lookup gathers rows and scatters gradients") {
  Tensor table = Tensor::from({3, 2}, {1, 2, 3, 4, 5, 6}, true);
  std::vector<int> idx{2, 0, 2};
  Tensor out = nd::embedding_lookup(table, idx);
  CHECK(out.at(0) == 5);
  CHECK(out.at(3) == 2);
  nd::backward(nd::sum(out));
  CHECK(table.grad()[0] == doctest::Approx(1.0));  // row 0 used once
  CHECK(table.grad()[4] == doctest::Approx(2.0));  // row 2 used twice
  CHECK(table.grad()[2] == doctest::Approx(0.0));  // row 1 unused
}

TEST_CASE("dropout: rate 0 and eval mode are the identity") {
  nd::Rng rng(3);
  Tensor x = Tensor::uniform({4, 4}, -1, 1, rng);
  nd::Rng drop_rng(4);
  Tensor same_rate0 = nd::dropout(x, 0.0, true, drop_rng);
  Tensor same_eval = nd::dropout(x, 0.7, false, drop_rng);
  for (size_t i = 0; i < x.size(); ++i) {
    CHECK(same_rate0.at(i) == x.at(i));
    CHECK(same_eval.at(i) == x.at(i));
  }
}

TEST_CASE("dropout at train time keeps or scales by 1/(1-rate)") {
  nd::Rng rng(9);
  Tensor x = Tensor::from({1, 1000}, std::vector<double>(1000, 1.0));
  nd::Rng drop_rng(10);
  Tensor y = nd::dropout(x, 0.2, true, drop_rng);
  size_t kept = 0;
  for (size_t i = 0; i < y.size(); ++i) {
    bool zero = y.at(i) == 0.0;
    bool scaled = std::abs(y.at(i) - 1.25) < 1e-12;
    CHECK((zero || scaled));
    if (scaled) ++kept;
  }
  CHECK(kept > 700);
  CHECK(kept < 900);
}

TEST_CASE("adam first step moves by about -alpha*sign(g)") {
  Tensor p = Tensor::from({2}, {1.0, -2.0}, true);
  nd::AdamConfig cfg;
  nd::Adam adam({p}, cfg);
  // constant gradient (0.5, -0.25)
  Tensor loss = nd::sum(nd::mul(p, Tensor::from({2}, {0.5, -0.25})));
  nd::backward(loss);
  adam.step();
  // first bias-corrected step is alpha * g / (|g| + eps)
  CHECK(p.at(0) == doctest::Approx(1.0 - 1e-3).epsilon(1e-6));
  CHECK(p.at(1) == doctest::Approx(-2.0 + 1e-3).epsilon(1e-6));
  CHECK_FALSE(p.has_grad());  // grads cleared by the step
}

TEST_CASE("adam leaves parameters with zero gradient unchanged") {
  Tensor p = Tensor::from({2}, {3.0, 4.0}, true);
  nd::Adam adam({p});
  Tensor loss = nd::sum(nd::mul(p, Tensor::from({2}, {0.0, 0.0})));
  nd::backward(loss);
  adam.step();
  CHECK(p.at(0) == doctest::Approx(3.0));
  CHECK(p.at(1) == doctest::Approx(4.0));
}

TEST_CASE("adam updates independent parameters independently") {
  Tensor a = Tensor::from({1}, {1.0}, true);
  Tensor b = Tensor::from({1}, {1.0}, true);
  nd::AdamConfig cfg;
  cfg.clip_enabled = false;
  nd::Adam both({a, b}, cfg);
  Tensor loss = nd::add(nd::scale(a, 2.0), nd::scale(b, -3.0));
  nd::backward(loss);
  both.step();

  Tensor c = Tensor::from({1}, {1.0}, true);
  nd::Adam solo({c}, cfg);
  nd::backward(nd::scale(c, 2.0));
  solo.step();
  CHECK(a.at(0) == doctest::Approx(c.at(0)).epsilon(1e-12));
}

TEST_CASE("adam throws on missing gradients") {
  Tensor p = Tensor::from({1}, {1.0}, true);
  nd::Adam adam({p});
  CHECK_THROWS_AS(adam.step(), Error);
}

TEST_CASE("gradient clipping caps the global norm") {
  Tensor p = Tensor::from({1}, {0.0}, true);
  nd::AdamConfig cfg;
  cfg.clip_norm = 1.0;
  nd::Adam adam({p}, cfg);
  nd::backward(nd::scale(p, 100.0));
  REQUIRE(p.has_grad());
  CHECK(p.grad()[0] == doctest::Approx(100.0));
  adam.step();  // clipped to norm 1 internally, then cleared
  CHECK_FALSE(p.has_grad());
}

TEST_CASE("log rejects non-positive input") {
  CHECK_THROWS_AS(nd::log(Tensor::scalar(0.0)), Error);
  CHECK_THROWS_AS(nd::log(Tensor::scalar(-1.0)), Error);
}

TEST_CASE("tape visits each node exactly once even with shared subgraphs") {
  Tensor x = Tensor::scalar(2.0, true);
  Tensor y = nd::mul(x, x);       // reused twice below
  Tensor z = nd::add(y, y);       // dz/dx = 2 * 2x = 8
  nd::backward(z);
  CHECK(x.grad()[0] == doctest::Approx(8.0));
}
