#include <doctest.h>

#include <cmath>

#include "primal/encoder.hpp"
#include "primal/errors.hpp"

using namespace primal;
using nd::Tensor;

namespace {

EncoderConfig tiny_config(int vocab) {
  EncoderConfig c;
  c.vocab_size = vocab;
  c.embedding_dim = 5;
  c.hidden_dim = 4;
  c.layers = 1;
  c.dropout = 0.0;
  c.truncate_len = 200;
  return c;
}

void zero_params(Encoder& enc) {
  for (auto& [name, t] : enc.named_params("enc")) {
    Tensor mutable_t = t;
    for (double& v : mutable_t.mutable_data()) v = 0.0;
  }
}

}  // namespace

TEST_CASE("expression_vector averages embedding rows") {
  nd::Rng rng(1);
  Encoder enc(tiny_config(6), rng);
  const Tensor& e = enc.embedding();
  size_t d = e.cols();

  std::vector<int> one{3};
  Tensor v1 = enc.expression_vector(one);
  for (size_t j = 0; j < d; ++j) CHECK(v1.at(j) == doctest::Approx(e.at(3 * d + j)));

  std::vector<int> two{3, 4};
  Tensor v2 = enc.expression_vector(two);
  for (size_t j = 0; j < d; ++j)
    CHECK(v2.at(j) == doctest::Approx(0.5 * (e.at(3 * d + j) + e.at(4 * d + j))));

  std::vector<int> repeated{2, 2};
  std::vector<int> single{2};
  Tensor va = enc.expression_vector(repeated);
  Tensor vb = enc.expression_vector(single);
  for (size_t j = 0; j < d; ++j) CHECK(va.at(j) == doctest::Approx(vb.at(j)));
}

TEST_CASE("expression_vector rejects an empty surface") {
  nd::Rng rng(1);
  Encoder enc(tiny_config(6), rng);
  std::vector<int> empty;
  CHECK_THROWS_AS(enc.expression_vector(empty), Error);
}

TEST_CASE("all-zero LSTM parameters give all-zero hidden states") {
  nd::Rng rng(2);
  Encoder enc(tiny_config(6), rng);
  zero_params(enc);
  nd::Rng drop(0);
  std::vector<int> idx{1, 2, 3};
  Tensor embedded = nd::embedding_lookup(enc.embedding(), idx);
  Tensor states = lstm_forward(enc.stack(), embedded, false, 0.0, drop);
  for (size_t i = 0; i < states.size(); ++i) CHECK(states.at(i) == 0.0);
}

TEST_CASE("forward-direction states depend only on the prefix") {
  nd::Rng rng(3);
  Encoder enc(tiny_config(8), rng);
  nd::Rng drop(0);
  size_t h = static_cast<size_t>(enc.config().hidden_dim);

  std::vector<int> one{5};
  std::vector<int> two{5, 6};
  Tensor s1 = lstm_forward(enc.stack(), nd::embedding_lookup(enc.embedding(), one), false, 0.0,
                           drop);
  Tensor s2 = lstm_forward(enc.stack(), nd::embedding_lookup(enc.embedding(), two), false, 0.0,
                           drop);
  // forward half of position 0 must agree; backward half must differ
  bool bwd_differs = false;
  for (size_t j = 0; j < h; ++j) {
    CHECK(s1.at(j) == doctest::Approx(s2.at(j)).epsilon(1e-12));
    if (std::abs(s1.at(h + j) - s2.at(h + j)) > 1e-9) bwd_differs = true;
  }
  CHECK(bwd_differs);
}

TEST_CASE("lstm_forward rejects empty input") {
  nd::Rng rng(4);
  Encoder enc(tiny_config(6), rng);
  nd::Rng drop(0);
  CHECK_THROWS_AS(
      lstm_forward(enc.stack(), Tensor::zeros({0, 5}), false, 0.0, drop), Error);
}

TEST_CASE("lstm gradients match finite differences") {
  nd::Rng rng(5);
  Encoder enc(tiny_config(7), rng);
  nd::Rng drop(0);
  std::vector<int> idx{1, 4, 2, 6, 3};
  std::vector<Tensor> params;
  for (auto& [name, t] : enc.named_params("enc")) params.push_back(t);
  auto f = [&]() {
    Tensor embedded = nd::embedding_lookup(enc.embedding(), idx);
    return nd::sum(lstm_forward(enc.stack(), embedded, false, 0.0, drop));
  };
  auto report = nd::grad_check(f, params, 1e-5, 1e-4);
  CHECK(report.pass);
}

TEST_CASE("two-layer bidirectional stack passes the gradient check") {
  nd::Rng rng(6);
  EncoderConfig cfg = tiny_config(7);
  cfg.layers = 2;
  Encoder enc(cfg, rng);
  nd::Rng drop(0);
  std::vector<int> idx{2, 5, 1};
  std::vector<Tensor> params;
  for (auto& [name, t] : enc.named_params("enc")) params.push_back(t);
  auto f = [&]() {
    Tensor embedded = nd::embedding_lookup(enc.embedding(), idx);
    return nd::sum(lstm_forward(enc.stack(), embedded, false, 0.0, drop));
  };
  CHECK(nd::grad_check(f, params, 1e-5, 1e-4).pass);
}

TEST_CASE("attention over a single state is degenerate") {
  nd::Rng rng(7);
  Encoder enc(tiny_config(6), rng);
  nd::Rng drop(0);
  std::vector<int> surface{2};
  std::vector<int> desc{3};
  Tensor v_e = enc.expression_vector(surface);
  AttnOut out = enc.pooled_states(desc, v_e, false, drop);
  REQUIRE(out.alpha.size() == 1);
  CHECK(out.alpha.at(0) == doctest::Approx(1.0));
}

TEST_CASE("zero attention matrix gives uniform weights") {
  nd::Rng rng(8);
  Encoder enc(tiny_config(8), rng);
  {
    Tensor w_a = enc.pool().w_a;
    for (double& v : w_a.mutable_data()) v = 0.0;
  }
  nd::Rng drop(0);
  std::vector<int> surface{1, 2};
  std::vector<int> desc{3, 4, 5, 6};
  Tensor v_e = enc.expression_vector(surface);
  AttnOut out = enc.pooled_states(desc, v_e, false, drop);
  REQUIRE(out.alpha.size() == 4);
  for (size_t j = 0; j < 4; ++j) CHECK(out.alpha.at(j) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("attention weights always form a probability distribution") {
  nd::Rng rng(9);
  Encoder enc(tiny_config(10), rng);
  nd::Rng drop(0);
  std::vector<int> surface{1, 7};
  for (int len : {1, 2, 5, 9}) {
    std::vector<int> desc;
    for (int t = 0; t < len; ++t) desc.push_back(2 + (t % 7));
    AttnOut out = enc.pooled_states(desc, enc.expression_vector(surface), false, drop);
    double sum = 0;
    for (size_t j = 0; j < out.alpha.size(); ++j) {
      CHECK(out.alpha.at(j) >= 0.0);
      sum += out.alpha.at(j);
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
}

TEST_CASE("sense vectors stay inside the tanh range and are deterministic") {
  nd::Rng rng(10);
  Encoder enc(tiny_config(9), rng);
  nd::Rng drop(0);
  std::vector<int> surface{1, 2, 3};
  std::vector<int> desc{4, 5, 6, 7, 8};
  Tensor v_e = enc.expression_vector(surface);
  Tensor a = enc.sense_vector(desc, v_e, false, drop);
  Tensor b = enc.sense_vector(desc, v_e, false, drop);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a.at(i) == b.at(i));
    CHECK(a.at(i) > -1.0);
    CHECK(a.at(i) < 1.0);
  }
}

TEST_CASE("descriptions beyond the truncation length behave as their prefix") {
  nd::Rng rng(11);
  EncoderConfig cfg = tiny_config(6);
  cfg.truncate_len = 200;
  Encoder enc(cfg, rng);
  nd::Rng drop(0);
  std::vector<int> surface{1};
  std::vector<int> long_desc(250), prefix(200);
  for (size_t i = 0; i < long_desc.size(); ++i) long_desc[i] = 2 + static_cast<int>(i % 4);
  std::copy(long_desc.begin(), long_desc.begin() + 200, prefix.begin());
  Tensor v_e = enc.expression_vector(surface);
  Tensor a = enc.sense_vector(long_desc, v_e, false, drop);
  Tensor b = enc.sense_vector(prefix, v_e, false, drop);
  for (size_t i = 0; i < a.size(); ++i) CHECK(a.at(i) == b.at(i));
}

TEST_CASE("full encoder composition passes the gradient check") {
  nd::Rng rng(12);
  Encoder enc(tiny_config(8), rng);
  nd::Rng drop(0);
  std::vector<int> surface{1, 6};
  std::vector<int> desc{2, 3, 4, 5, 2, 3, 4, 5};  // 8 characters
  std::vector<Tensor> params;
  for (auto& [name, t] : enc.named_params("enc")) params.push_back(t);
  auto f = [&]() {
    Tensor v_e = enc.expression_vector(surface);
    return nd::sum(enc.sense_vector(desc, v_e, false, drop));
  };
  auto report = nd::grad_check(f, params, 1e-5, 1e-4);
  CHECK(report.pass);
}

TEST_CASE("attention_pool rejects mismatched dimensions") {
  nd::Rng rng(13);
  Encoder enc(tiny_config(6), rng);
  Tensor states = Tensor::zeros({3, static_cast<size_t>(enc.config().state_dim())});
  Tensor bad_v_e = Tensor::zeros({1, 2});  // embedding dim is 5
  CHECK_THROWS_AS(attention_pool(enc.pool(), states, bad_v_e), Error);
}
