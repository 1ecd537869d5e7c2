#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "scaffcite/errors.hpp"
#include "scaffcite/layers.hpp"

using namespace scaffcite;
using namespace scaffcite::nn;

namespace {

double sig(double v) { return 1.0 / (1.0 + std::exp(-v)); }

LstmParams tiny_lstm(std::vector<double> wi, double bi, std::vector<double> wf, double bf,
                     std::vector<double> wg, double bg, std::vector<double> wo, double bo) {
  LstmParams p;
  p.input_dim = 1;
  p.hidden_dim = 1;
  p.w_input = ad::parameter(ad::Tensor({1, 2}, std::move(wi)));
  p.b_input = ad::parameter(ad::Tensor({1}, {bi}));
  p.w_forget = ad::parameter(ad::Tensor({1, 2}, std::move(wf)));
  p.b_forget = ad::parameter(ad::Tensor({1}, {bf}));
  p.w_cell = ad::parameter(ad::Tensor({1, 2}, std::move(wg)));
  p.b_cell = ad::parameter(ad::Tensor({1}, {bg}));
  p.w_output = ad::parameter(ad::Tensor({1, 2}, std::move(wo)));
  p.b_output = ad::parameter(ad::Tensor({1}, {bo}));
  return p;
}

std::vector<ad::Var> lstm_vars(const LstmParams& p) {
  return {p.w_input, p.b_input, p.w_forget, p.b_forget,
          p.w_cell,  p.b_cell,  p.w_output, p.b_output};
}

}  // namespace

TEST_CASE("embed_sequence shapes and UNK fallback") {
  std::mt19937_64 rng(1);
  TokenEmbeddingTable table = make_embedding_table(50, 100, false, rng);

  ad::Var x = embed_sequence({2, 3, 4}, table);
  CHECK(x->value.shape() == std::vector<std::size_t>{3, 100});

  // unknown tokens are mapped to the UNK row by the vocabulary (index 1)
  ad::Var u = embed_sequence({1}, table);
  for (std::size_t j = 0; j < 100; ++j) {
    CHECK(u->value[j] == table.rows->value.at(1, j));
  }

  ContextVectors ctx(3, std::vector<double>(1024, 0.5));
  ad::Var xc = embed_sequence({2, 3, 4}, table, &ctx);
  CHECK(xc->value.shape() == std::vector<std::size_t>{3, 1124});
  CHECK(xc->value.at(0, 100) == 0.5);

  ContextVectors short_ctx(2, std::vector<double>(8, 0.0));
  CHECK_THROWS_WITH_AS(embed_sequence({2, 3, 4}, table, &short_ctx, "inst-7"),
                       doctest::Contains("inst-7"), DataError);
}

TEST_CASE("lstm_step zero case and saturation") {
  LstmParams zero = tiny_lstm({0, 0}, 0, {0, 0}, 0, {0, 0}, 0, {0, 0}, 0);
  ad::Var x = ad::constant(ad::Tensor({1, 1}, {0.0}));
  ad::Var h0 = ad::constant(ad::Tensor({1, 1}, {0.0}));
  ad::Var c0 = ad::constant(ad::Tensor({1, 1}, {0.0}));
  auto [h, c] = lstm_step(x, h0, c0, zero);
  CHECK(h->value[0] == 0.0);
  CHECK(c->value[0] == 0.0);

  // huge forget bias, zero input weights: the cell state is carried over
  LstmParams carry = tiny_lstm({0, 0}, 0, {0, 0}, 50.0, {0, 0}, 0, {0, 0}, 0);
  ad::Var cp = ad::constant(ad::Tensor({1, 1}, {-0.7}));
  auto [h2, c2] = lstm_step(x, h0, cp, carry);
  CHECK(c2->value[0] == doctest::Approx(-0.7).epsilon(1e-9));
}

TEST_CASE("lstm_step matches a hand-unrolled computation") {
  LstmParams p = tiny_lstm({0.5, 0.25}, 0.1, {0.3, -0.2}, 1.0, {0.7, 0.2}, -0.1, {0.4, 0.1}, 0.2);
  const double xv = 0.5, hv = 0.3, cv = -0.4;
  ad::Var x = ad::constant(ad::Tensor({1, 1}, {xv}));
  ad::Var h0 = ad::constant(ad::Tensor({1, 1}, {hv}));
  ad::Var c0 = ad::constant(ad::Tensor({1, 1}, {cv}));
  auto [h, c] = lstm_step(x, h0, c0, p);

  const double i = sig(0.5 * xv + 0.25 * hv + 0.1);
  const double f = sig(0.3 * xv - 0.2 * hv + 1.0);
  const double g = std::tanh(0.7 * xv + 0.2 * hv - 0.1);
  const double o = sig(0.4 * xv + 0.1 * hv + 0.2);
  const double c_expect = f * cv + i * g;
  CHECK(c->value[0] == doctest::Approx(c_expect).epsilon(1e-12));
  CHECK(h->value[0] == doctest::Approx(o * std::tanh(c_expect)).epsilon(1e-12));
}

TEST_CASE("lstm_step rejects inconsistent dimensions") {
  std::mt19937_64 rng(2);
  LstmParams p = make_lstm_params(3, 4, rng);
  ad::Var bad = ad::constant(ad::Tensor({1, 2}));
  ad::Var h0 = ad::constant(ad::Tensor({1, 4}));
  CHECK_THROWS_AS(lstm_step(bad, h0, h0, p), ContractError);
}

TEST_CASE("bilstm_encode singleton and output width") {
  std::mt19937_64 rng(3);
  LstmParams fwd = make_lstm_params(8, 50, rng);
  LstmParams bwd = make_lstm_params(8, 50, rng);
  ad::Var one = ad::constant(ad::Tensor({1, 8}, std::vector<double>(8, 0.3)));
  CHECK(bilstm_encode(one, fwd, bwd)->value.shape() == std::vector<std::size_t>{1, 100});

  CHECK_THROWS_AS(bilstm_encode(ad::constant(ad::Tensor({0, 8})), fwd, bwd), ContractError);
}

TEST_CASE("bilstm_encode palindrome symmetry with tied directions") {
  std::mt19937_64 rng(4);
  LstmParams tied = make_lstm_params(2, 3, rng);
  std::vector<double> vals{0.1, -0.2, 0.5, 0.4, 0.9, -0.7, 0.5, 0.4, 0.1, -0.2};
  ad::Var x = ad::constant(ad::Tensor({5, 2}, vals));  // palindromic rows
  ad::Var h = bilstm_encode(x, tied, tied);
  const std::size_t n = 5, d2 = 3;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d2; ++j) {
      CHECK(h->value.at(i, j) == doctest::Approx(h->value.at(n - 1 - i, d2 + j)).epsilon(1e-12));
    }
  }
}

TEST_CASE("bilstm_encode causality") {
  std::mt19937_64 rng(5);
  LstmParams fwd = make_lstm_params(2, 3, rng);
  LstmParams bwd = make_lstm_params(2, 3, rng);
  ad::Tensor base({4, 2}, {0.1, 0.2, -0.3, 0.4, 0.5, -0.6, 0.7, 0.8});
  ad::Tensor perturbed = base;
  perturbed.at(3, 0) += 1.0;  // token after position 1
  perturbed.at(3, 1) -= 0.5;
  ad::Var h_base = bilstm_encode(ad::constant(base), fwd, bwd);
  ad::Var h_pert = bilstm_encode(ad::constant(perturbed), fwd, bwd);
  // forward half at row 1 ignores tokens > 1
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(h_base->value.at(1, j) == h_pert->value.at(1, j));
  }

  ad::Tensor early = base;
  early.at(0, 0) -= 0.4;  // token before position 2
  ad::Var h_early = bilstm_encode(ad::constant(early), fwd, bwd);
  // backward half at row 2 ignores tokens < 2
  for (std::size_t j = 3; j < 6; ++j) {
    CHECK(h_base->value.at(2, j) == h_early->value.at(2, j));
  }
}

TEST_CASE("attention_pool") {
  // identical rows: uniform weights, pooled equals any row
  ad::Var h = ad::constant(ad::Tensor({3, 2}, {0.5, -1.0, 0.5, -1.0, 0.5, -1.0}));
  AttentionQuery q{ad::parameter(ad::Tensor({2, 1}, {0.7, -0.3}))};
  AttentionResult r = attention_pool(h, q);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(r.weights->value[i] == doctest::Approx(1.0 / 3).epsilon(1e-12));
  }
  CHECK(r.pooled->value[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.pooled->value[1] == doctest::Approx(-1.0).epsilon(1e-12));

  // zero query: uniform weights regardless of rows
  ad::Var mixed = ad::constant(ad::Tensor({4, 2}, {1, 2, 3, 4, 5, 6, 7, 8}));
  AttentionQuery zq{ad::parameter(ad::Tensor({2, 1}, {0.0, 0.0}))};
  AttentionResult rz = attention_pool(mixed, zq);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(rz.weights->value[i] == doctest::Approx(0.25).epsilon(1e-12));
  }

  // scores (1, 3): hand softmax
  ad::Var two = ad::constant(ad::Tensor({2, 1}, {1.0, 3.0}));
  AttentionQuery unit{ad::parameter(ad::Tensor({1, 1}, {1.0}))};
  AttentionResult r2 = attention_pool(two, unit);
  CHECK(r2.weights->value[0] == doctest::Approx(0.1192).epsilon(1e-3));
  CHECK(r2.weights->value[1] == doctest::Approx(0.8808).epsilon(1e-3));
}

TEST_CASE("attention weights are nonnegative and sum to one") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  for (int trial = 0; trial < 25; ++trial) {
    ad::Tensor ht({6, 4});
    for (std::size_t i = 0; i < ht.numel(); ++i) ht[i] = dist(rng);
    ad::Tensor wt({4, 1});
    for (std::size_t i = 0; i < 4; ++i) wt[i] = dist(rng);
    AttentionResult r = attention_pool(ad::constant(std::move(ht)), {ad::parameter(std::move(wt))});
    double total = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
      CHECK(r.weights->value[i] >= 0.0);
      total += r.weights->value[i];
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("mlp_head_forward") {
  MlpHead head;
  head.w_hidden = ad::parameter(ad::Tensor({2, 2}, {1, 2, 3, 4}));
  head.b_hidden = ad::parameter(ad::Tensor({2}, {0.5, -1}));
  head.w_out = ad::parameter(ad::Tensor({2, 2}, {1, 0, 0, 1}));
  head.b_out = ad::parameter(ad::Tensor({2}, {0.1, 0.2}));
  head.dropout_rate = 0.2;

  ad::Var z = ad::constant(ad::Tensor({1, 2}, {1.0, 0.5}));
  ad::Var logits = mlp_head_forward(z, head, false, nullptr);
  CHECK(logits->value[0] == doctest::Approx(3.1).epsilon(1e-12));
  CHECK(logits->value[1] == doctest::Approx(3.2).epsilon(1e-12));

  // inference is rng-independent and deterministic
  ad::Var again = mlp_head_forward(z, head, false, nullptr);
  CHECK(again->value.values() == logits->value.values());

  // zero weights: zero logits, uniform probabilities downstream
  MlpHead zero;
  zero.w_hidden = ad::parameter(ad::Tensor({2, 2}));
  zero.b_hidden = ad::parameter(ad::Tensor({2}));
  zero.w_out = ad::parameter(ad::Tensor({2, 2}));
  zero.b_out = ad::parameter(ad::Tensor({2}));
  ad::Var zl = mlp_head_forward(z, zero, false, nullptr);
  CHECK(zl->value.values() == std::vector<double>{0, 0});
}

TEST_CASE("cross_entropy values and shift invariance") {
  ad::Var uniform = ad::constant(ad::Tensor({1, 3}, {0.4, 0.4, 0.4}));
  CHECK(cross_entropy(uniform, 1)->value[0] == doctest::Approx(std::log(3.0)).epsilon(1e-9));

  ad::Var confident = ad::constant(ad::Tensor({1, 2}, {500.0, -500.0}));
  CHECK(cross_entropy(confident, 0)->value[0] == doctest::Approx(0.0).epsilon(1e-9));

  ad::Var l = ad::constant(ad::Tensor({1, 2}, {1.0, 2.0}));
  CHECK(cross_entropy(l, 0)->value[0] == doctest::Approx(1.3132616875).epsilon(1e-9));

  ad::Var shifted = ad::constant(ad::Tensor({1, 2}, {1.0 + 7.5, 2.0 + 7.5}));
  CHECK(cross_entropy(shifted, 0)->value[0] ==
        doctest::Approx(cross_entropy(l, 0)->value[0]).epsilon(1e-9));

  CHECK_THROWS_AS(cross_entropy(l, 2), ContractError);
}

TEST_CASE("dropout identity and expectation preservation") {
  std::mt19937_64 rng(7);
  ad::Var x = ad::constant(ad::Tensor({2, 2}, {1, 2, 3, 4}));
  ad::Var same = dropout(x, 0.0, rng);
  CHECK(same->value.values() == x->value.values());

  ad::Var ones = ad::constant(ad::Tensor::filled({1000, 1000}, 1.0));
  ad::Var dropped = dropout(ones, 0.2, rng);
  double mean = 0.0;
  for (std::size_t i = 0; i < dropped->value.numel(); ++i) mean += dropped->value[i];
  mean /= static_cast<double>(dropped->value.numel());
  CHECK(mean == doctest::Approx(1.0).epsilon(0.01));

  CHECK_THROWS_AS(dropout(x, 1.0, rng), ContractError);
}

TEST_CASE("every layer passes grad_check") {
  // Check points use weights in [-1, 1]: tiny weights make some true
  // gradients fall below what central differences can resolve at h=1e-5.
  std::mt19937_64 rng(8);
  TokenEmbeddingTable table = make_embedding_table(6, 3, true, rng);
  LstmParams fwd = make_lstm_params(3, 4, rng);
  LstmParams bwd = make_lstm_params(3, 4, rng);
  AttentionQuery query = make_attention_query(8, rng);
  MlpHead head = make_mlp_head(8, 5, 3, 0.0, rng);

  std::vector<ad::Var> leaves{table.rows, query.w, head.w_hidden, head.b_hidden, head.w_out,
                              head.b_out};
  for (const ad::Var& v : lstm_vars(fwd)) leaves.push_back(v);
  for (const ad::Var& v : lstm_vars(bwd)) leaves.push_back(v);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (const ad::Var& v : leaves) {
    for (std::size_t i = 0; i < v->value.numel(); ++i) v->value[i] = dist(rng);
  }

  auto build = [&]() {
    ad::Var x = embed_sequence({2, 4, 5, 3}, table);
    ad::Var h = bilstm_encode(x, fwd, bwd);
    AttentionResult pooled = attention_pool(h, query);
    ad::Var logits = mlp_head_forward(pooled.pooled, head, false, nullptr);
    return cross_entropy(logits, 1);
  };
  CHECK(ad::grad_check(build, leaves, 1e-5) < 1e-4);
}
