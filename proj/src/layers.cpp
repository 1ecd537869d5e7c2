#include "scaffcite/layers.hpp"

#include <cmath>

#include "scaffcite/errors.hpp"

namespace scaffcite::nn {

namespace {

ad::Tensor uniform_tensor(std::vector<std::size_t> shape, std::mt19937_64& rng, double bound = 0.1) {
  ad::Tensor t(std::move(shape));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = dist(rng);
  return t;
}

// Gate weights pre-transposed once per sequence so each step is a plain
// [x;h] (1 x in+hid) times (in+hid x hid) product.
struct LstmGates {
  ad::Var wt_input, wt_forget, wt_cell, wt_output;
  ad::Var b_input, b_forget, b_cell, b_output;
};

LstmGates transpose_gates(const LstmParams& p) {
  return {ad::transpose(p.w_input), ad::transpose(p.w_forget), ad::transpose(p.w_cell),
          ad::transpose(p.w_output), p.b_input, p.b_forget, p.b_cell, p.b_output};
}

std::pair<ad::Var, ad::Var> lstm_cell(const ad::Var& x_t, const ad::Var& h_prev,
                                      const ad::Var& c_prev, const LstmGates& g) {
  ad::Var joined = ad::concat_last_axis(x_t, h_prev);
  ad::Var gate_i = ad::sigmoid(ad::add(ad::matmul(joined, g.wt_input), g.b_input));
  ad::Var gate_f = ad::sigmoid(ad::add(ad::matmul(joined, g.wt_forget), g.b_forget));
  ad::Var cand = ad::tanh(ad::add(ad::matmul(joined, g.wt_cell), g.b_cell));
  ad::Var gate_o = ad::sigmoid(ad::add(ad::matmul(joined, g.wt_output), g.b_output));
  ad::Var c_t = ad::add(ad::mul(gate_f, c_prev), ad::mul(gate_i, cand));
  ad::Var h_t = ad::mul(gate_o, ad::tanh(c_t));
  return {h_t, c_t};
}

}  // namespace

TokenEmbeddingTable make_embedding_table(std::size_t vocab_size, std::size_t dim, bool trainable,
                                         std::mt19937_64& rng) {
  ad::Tensor rows = uniform_tensor({vocab_size, dim}, rng);
  // reserved rows: 0 = PAD, 1 = UNK
  for (std::size_t r = 0; r < std::min<std::size_t>(2, vocab_size); ++r) {
    for (std::size_t c = 0; c < dim; ++c) rows.at(r, c) = 0.0;
  }
  return {vocab_size, dim, ad::leaf(std::move(rows), trainable), trainable};
}

LstmParams make_lstm_params(std::size_t input_dim, std::size_t hidden_dim, std::mt19937_64& rng) {
  const std::vector<std::size_t> wshape{hidden_dim, input_dim + hidden_dim};
  LstmParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.w_input = ad::parameter(uniform_tensor(wshape, rng));
  p.b_input = ad::parameter(uniform_tensor({hidden_dim}, rng));
  p.w_forget = ad::parameter(uniform_tensor(wshape, rng));
  p.b_forget = ad::parameter(ad::Tensor::filled({hidden_dim}, 1.0));
  p.w_cell = ad::parameter(uniform_tensor(wshape, rng));
  p.b_cell = ad::parameter(uniform_tensor({hidden_dim}, rng));
  p.w_output = ad::parameter(uniform_tensor(wshape, rng));
  p.b_output = ad::parameter(uniform_tensor({hidden_dim}, rng));
  return p;
}

AttentionQuery make_attention_query(std::size_t dim, std::mt19937_64& rng) {
  return {ad::parameter(uniform_tensor({dim, 1}, rng))};
}

MlpHead make_mlp_head(std::size_t input_dim, std::size_t hidden_dim, std::size_t num_classes,
                      double dropout_rate, std::mt19937_64& rng) {
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw ContractError("mlp head: dropout rate must be in [0,1), got " +
                        std::to_string(dropout_rate));
  }
  MlpHead h;
  h.w_hidden = ad::parameter(uniform_tensor({input_dim, hidden_dim}, rng));
  h.b_hidden = ad::parameter(uniform_tensor({hidden_dim}, rng));
  h.w_out = ad::parameter(uniform_tensor({hidden_dim, num_classes}, rng));
  h.b_out = ad::parameter(uniform_tensor({num_classes}, rng));
  h.dropout_rate = dropout_rate;
  return h;
}

ad::Var embed_sequence(const std::vector<int>& token_ids, const TokenEmbeddingTable& table,
                       const ContextVectors* sidecar, const std::string& instance_id) {
  if (token_ids.empty()) throw ContractError("embed_sequence: empty token sequence");
  if (sidecar && sidecar->size() != token_ids.size()) {
    throw DataError("sidecar vectors for instance '" + instance_id + "' cover " +
                    std::to_string(sidecar->size()) + " tokens, expected " +
                    std::to_string(token_ids.size()));
  }
  std::vector<ad::Var> rows;
  rows.reserve(token_ids.size());
  for (std::size_t i = 0; i < token_ids.size(); ++i) {
    const int id = token_ids[i];
    if (id < 0 || static_cast<std::size_t>(id) >= table.vocab_size) {
      throw ContractError("embed_sequence: token id " + std::to_string(id) +
                          " outside vocabulary of size " + std::to_string(table.vocab_size));
    }
    ad::Var row = ad::select_row(table.rows, static_cast<std::size_t>(id));
    if (sidecar) {
      const std::vector<double>& ctx = (*sidecar)[i];
      if (i > 0 && ctx.size() != (*sidecar)[0].size()) {
        throw DataError("sidecar vectors for instance '" + instance_id +
                        "' have inconsistent widths");
      }
      row = ad::concat_last_axis(row, ad::constant(ad::Tensor({1, ctx.size()}, ctx)));
    }
    rows.push_back(std::move(row));
  }
  return ad::stack_rows(rows);
}

std::pair<ad::Var, ad::Var> lstm_step(const ad::Var& x_t, const ad::Var& h_prev,
                                      const ad::Var& c_prev, const LstmParams& params) {
  if (x_t->value.ndim() != 2 || x_t->value.cols() != params.input_dim ||
      h_prev->value.numel() != params.hidden_dim || c_prev->value.numel() != params.hidden_dim) {
    throw ContractError("lstm_step: input " + x_t->value.shape_str() + ", state " +
                        h_prev->value.shape_str() + " inconsistent with dims (" +
                        std::to_string(params.input_dim) + ", " +
                        std::to_string(params.hidden_dim) + ")");
  }
  return lstm_cell(x_t, h_prev, c_prev, transpose_gates(params));
}

ad::Var bilstm_encode(const ad::Var& x, const LstmParams& fwd, const LstmParams& bwd) {
  const std::size_t n = x->value.ndim() == 2 ? x->value.rows() : 0;
  if (n == 0) throw ContractError("bilstm_encode: empty sequence");

  const LstmGates fg = transpose_gates(fwd);
  const LstmGates bg = transpose_gates(bwd);

  std::vector<ad::Var> fwd_states(n), bwd_states(n);
  ad::Var h = ad::constant(ad::Tensor({1, fwd.hidden_dim}));
  ad::Var c = ad::constant(ad::Tensor({1, fwd.hidden_dim}));
  for (std::size_t t = 0; t < n; ++t) {
    std::tie(h, c) = lstm_cell(ad::select_row(x, t), h, c, fg);
    fwd_states[t] = h;
  }
  h = ad::constant(ad::Tensor({1, bwd.hidden_dim}));
  c = ad::constant(ad::Tensor({1, bwd.hidden_dim}));
  for (std::size_t t = n; t-- > 0;) {
    std::tie(h, c) = lstm_cell(ad::select_row(x, t), h, c, bg);
    bwd_states[t] = h;
  }

  std::vector<ad::Var> rows(n);
  for (std::size_t t = 0; t < n; ++t) {
    rows[t] = ad::concat_last_axis(fwd_states[t], bwd_states[t]);
  }
  return ad::stack_rows(rows);
}

AttentionResult attention_pool(const ad::Var& h, const AttentionQuery& query) {
  const std::size_t n = h->value.rows();
  ad::Var scores = ad::reshape(ad::matmul(h, query.w), {1, n});
  ad::Var alpha = ad::softmax_last_axis(scores);
  return {ad::matmul(alpha, h), alpha};
}

ad::Var mlp_head_forward(const ad::Var& z, const MlpHead& head, bool training,
                         std::mt19937_64* rng) {
  ad::Var in = z;
  if (training && head.dropout_rate > 0.0) {
    if (!rng) throw ContractError("mlp_head_forward: training with dropout needs an rng");
    in = dropout(z, head.dropout_rate, *rng);
  }
  ad::Var hidden = ad::relu(ad::add(ad::matmul(in, head.w_hidden), head.b_hidden));
  return ad::add(ad::matmul(hidden, head.w_out), head.b_out);
}

ad::Var cross_entropy(const ad::Var& logits, std::size_t gold) {
  const ad::Tensor& l = logits->value;
  const std::size_t k = l.numel();
  if (gold >= k) {
    throw ContractError("cross_entropy: gold index " + std::to_string(gold) +
                        " out of range for " + std::to_string(k) + " classes");
  }
  double mx = l[0];
  for (std::size_t i = 1; i < k; ++i) mx = std::max(mx, l[i]);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) total += std::exp(l[i] - mx);
  const double log_sum = mx + std::log(total);

  auto node = std::make_shared<ad::Node>();
  node->value = ad::Tensor::scalar(log_sum - l[gold]);
  node->parents = {logits};
  node->requires_grad = logits->requires_grad;
  node->op = "cross_entropy";
  if (node->requires_grad) {
    node->backprop = [gold, mx, log_sum](ad::Node& self) {
      ad::Node& p = *self.parents[0];
      if (!p.requires_grad) return;
      const double g = self.value.grad()[0];
      std::vector<double>& pg = p.value.grad();
      const double denom = std::exp(log_sum - mx);
      for (std::size_t i = 0; i < pg.size(); ++i) {
        const double soft = std::exp(p.value[i] - mx) / denom;
        pg[i] += g * (soft - (i == gold ? 1.0 : 0.0));
      }
    };
  }
  return node;
}

ad::Var dropout(const ad::Var& x, double rate, std::mt19937_64& rng) {
  if (rate < 0.0 || rate >= 1.0) {
    throw ContractError("dropout: rate must be in [0,1), got " + std::to_string(rate));
  }
  if (rate == 0.0) return x;
  ad::Tensor mask(x->value.shape());
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < mask.numel(); ++i) {
    mask[i] = dist(rng) < rate ? 0.0 : keep_scale;
  }
  return ad::mul(x, ad::constant(std::move(mask)));
}

}  // namespace scaffcite::nn
