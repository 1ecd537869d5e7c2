#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "scaffcite/autodiff.hpp"

namespace scaffcite::nn {

/// Per-token contextual vectors supplied alongside the static embeddings.
using ContextVectors = std::vector<std::vector<double>>;

struct TokenEmbeddingTable {
  std::size_t vocab_size = 0;
  std::size_t dim = 0;    // static embedding width
  ad::Var rows;           // vocab_size x dim
  bool trainable = false;
};

/// Weights for one LSTM direction. Gate matrices act on [x; h_prev], so each
/// has shape hidden x (input + hidden); biases have length hidden.
struct LstmParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  ad::Var w_input, w_forget, w_cell, w_output;
  ad::Var b_input, b_forget, b_cell, b_output;
};

struct AttentionQuery {
  ad::Var w;  // (2*d2) x 1 column vector
};

struct MlpHead {
  ad::Var w_hidden;  // input x hidden
  ad::Var b_hidden;  // hidden
  ad::Var w_out;     // hidden x classes
  ad::Var b_out;     // classes
  double dropout_rate = 0.0;
  std::size_t num_classes() const { return b_out->value.numel(); }
};

// Initializers. All weights are drawn uniformly from [-0.1, 0.1] off the
// given rng; the LSTM forget-gate bias starts at 1.0. PAD and UNK embedding
// rows start at zero.
TokenEmbeddingTable make_embedding_table(std::size_t vocab_size, std::size_t dim, bool trainable,
                                         std::mt19937_64& rng);
LstmParams make_lstm_params(std::size_t input_dim, std::size_t hidden_dim, std::mt19937_64& rng);
AttentionQuery make_attention_query(std::size_t dim, std::mt19937_64& rng);
MlpHead make_mlp_head(std::size_t input_dim, std::size_t hidden_dim, std::size_t num_classes,
                      double dropout_rate, std::mt19937_64& rng);

/// Token ids -> n x d1 matrix: static embedding rows, each concatenated with
/// its contextual vector when a sidecar is supplied. `instance_id` names the
/// instance in sidecar mismatch errors.
ad::Var embed_sequence(const std::vector<int>& token_ids, const TokenEmbeddingTable& table,
                       const ContextVectors* sidecar = nullptr,
                       const std::string& instance_id = "");

/// One LSTM cell update; x_t, h_prev, c_prev are 1 x dim rows.
std::pair<ad::Var, ad::Var> lstm_step(const ad::Var& x_t, const ad::Var& h_prev,
                                      const ad::Var& c_prev, const LstmParams& params);

/// n x d1 -> n x 2*d2; row i holds the forward state after tokens 0..i and
/// the backward state after tokens n-1..i. Initial states are zero.
ad::Var bilstm_encode(const ad::Var& x, const LstmParams& fwd, const LstmParams& bwd);

struct AttentionResult {
  ad::Var pooled;   // 1 x 2*d2
  ad::Var weights;  // 1 x n, sums to 1
};
AttentionResult attention_pool(const ad::Var& h, const AttentionQuery& query);

/// Dropout on the pooled input (training only), then relu hidden layer and a
/// linear output layer. Softmax is the caller's business.
ad::Var mlp_head_forward(const ad::Var& z, const MlpHead& head, bool training,
                         std::mt19937_64* rng);

/// -log softmax(logits)[gold], computed in log space.
ad::Var cross_entropy(const ad::Var& logits, std::size_t gold);

/// Inverted dropout: zero with probability `rate`, survivors scaled by
/// 1/(1-rate). Identity at rate 0.
ad::Var dropout(const ad::Var& x, double rate, std::mt19937_64& rng);

}  // namespace scaffcite::nn
