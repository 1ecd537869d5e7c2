#include "scaffcite/gradcheck_suite.hpp"

#include <random>

#include "scaffcite/errors.hpp"
#include "scaffcite/model.hpp"

namespace scaffcite::gradcheck {

namespace {

constexpr double kStep = 1e-5;

ad::Tensor random_tensor(std::vector<std::size_t> shape, std::mt19937_64& rng, double bound) {
  ad::Tensor t(std::move(shape));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = dist(rng);
  return t;
}

// check points for weight tensors sit in [-1, 1]: weights so small that true
// gradients drop toward 1e-7 cannot be resolved by central differences
void condition(const std::vector<ad::Var>& leaves, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (const ad::Var& v : leaves) {
    for (std::size_t i = 0; i < v->value.numel(); ++i) v->value[i] = dist(rng);
  }
}

}  // namespace

std::vector<ComponentResult> check_ops() {
  std::vector<ComponentResult> results;
  std::mt19937_64 rng(20240501);
  const auto inputs = [&rng](std::vector<std::size_t> shape) {
    return ad::parameter(random_tensor(std::move(shape), rng, 2.0));
  };

  {
    ad::Var a = inputs({3, 4}), b = inputs({4, 2});
    results.push_back({"matmul", ad::grad_check(
                                     [&]() { return ad::sum_all(ad::matmul(a, b)); }, {a, b},
                                     kStep)});
  }
  {
    ad::Var a = inputs({3, 4}), b = inputs({3, 4});
    results.push_back(
        {"add", ad::grad_check([&]() { return ad::sum_all(ad::mul(ad::add(a, b), a)); }, {a, b},
                               kStep)});
  }
  {
    ad::Var a = inputs({3, 4}), bias = inputs({4});
    results.push_back({"add_bias", ad::grad_check(
                                       [&]() {
                                         return ad::sum_all(
                                             ad::mul(ad::add(a, bias), ad::add(a, bias)));
                                       },
                                       {a, bias}, kStep)});
  }
  {
    ad::Var a = inputs({2, 5}), b = inputs({2, 5});
    results.push_back(
        {"sub", ad::grad_check([&]() { return ad::sum_all(ad::mul(ad::sub(a, b), b)); }, {a, b},
                               kStep)});
  }
  {
    ad::Var a = inputs({2, 5}), b = inputs({2, 5});
    results.push_back({"mul", ad::grad_check([&]() { return ad::sum_all(ad::mul(a, b)); }, {a, b},
                                             kStep)});
  }
  {
    ad::Var x = inputs({3, 3});
    results.push_back(
        {"tanh", ad::grad_check([&]() { return ad::sum_all(ad::mul(ad::tanh(x), x)); }, {x},
                                kStep)});
  }
  {
    ad::Var x = inputs({3, 3});
    results.push_back({"sigmoid", ad::grad_check(
                                      [&]() { return ad::sum_all(ad::mul(ad::sigmoid(x), x)); },
                                      {x}, kStep)});
  }
  {
    ad::Var x = inputs({3, 3});
    results.push_back(
        {"relu", ad::grad_check([&]() { return ad::sum_all(ad::mul(ad::relu(x), x)); }, {x},
                                kStep)});
  }
  {
    ad::Var x = inputs({2, 4});
    ad::Var mix = inputs({2, 4});
    results.push_back({"softmax_last_axis",
                       ad::grad_check(
                           [&]() {
                             return ad::sum_all(ad::mul(ad::softmax_last_axis(x), mix));
                           },
                           {x, mix}, kStep)});
  }
  {
    ad::Var a = inputs({3, 2}), b = inputs({3, 3});
    results.push_back({"concat_last_axis",
                       ad::grad_check(
                           [&]() {
                             ad::Var joined = ad::concat_last_axis(a, b);
                             return ad::sum_all(ad::mul(joined, joined));
                           },
                           {a, b}, kStep)});
  }
  {
    ad::Var x = inputs({4, 3});
    results.push_back({"select_row", ad::grad_check(
                                         [&]() {
                                           ad::Var r = ad::select_row(x, 2);
                                           return ad::sum_all(ad::mul(r, r));
                                         },
                                         {x}, kStep)});
  }
  {
    ad::Var a = inputs({1, 4}), b = inputs({1, 4});
    results.push_back({"stack_rows", ad::grad_check(
                                         [&]() {
                                           ad::Var s = ad::stack_rows({a, b, a});
                                           return ad::sum_all(ad::mul(s, s));
                                         },
                                         {a, b}, kStep)});
  }
  {
    ad::Var x = inputs({3, 4});
    results.push_back({"transpose", ad::grad_check(
                                        [&]() {
                                          ad::Var t = ad::transpose(x);
                                          return ad::sum_all(ad::mul(t, t));
                                        },
                                        {x}, kStep)});
  }
  {
    ad::Var x = inputs({3, 4});
    results.push_back({"reshape", ad::grad_check(
                                      [&]() {
                                        ad::Var r = ad::reshape(x, {2, 6});
                                        return ad::sum_all(ad::mul(r, r));
                                      },
                                      {x}, kStep)});
  }
  {
    ad::Var x = inputs({2, 3});
    results.push_back(
        {"scale", ad::grad_check([&]() { return ad::sum_all(ad::scale(ad::tanh(x), -1.7)); }, {x},
                                 kStep)});
  }
  return results;
}

std::vector<ComponentResult> check_layers() {
  std::vector<ComponentResult> results;
  std::mt19937_64 rng(20240502);

  {
    nn::TokenEmbeddingTable table = nn::make_embedding_table(8, 4, true, rng);
    condition({table.rows}, rng);
    ad::Var mix = ad::parameter(random_tensor({3, 4}, rng, 1.0));
    results.push_back({"embed_sequence",
                       ad::grad_check(
                           [&]() {
                             ad::Var x = nn::embed_sequence({2, 6, 3}, table);
                             return ad::sum_all(ad::mul(x, mix));
                           },
                           {table.rows, mix}, kStep)});
  }
  {
    nn::LstmParams p = nn::make_lstm_params(3, 4, rng);
    std::vector<ad::Var> leaves{p.w_input, p.b_input, p.w_forget, p.b_forget,
                                p.w_cell,  p.b_cell,  p.w_output, p.b_output};
    condition(leaves, rng);
    ad::Var x = ad::parameter(random_tensor({1, 3}, rng, 1.0));
    ad::Var h0 = ad::parameter(random_tensor({1, 4}, rng, 1.0));
    ad::Var c0 = ad::parameter(random_tensor({1, 4}, rng, 1.0));
    leaves.push_back(x);
    leaves.push_back(h0);
    leaves.push_back(c0);
    results.push_back({"lstm_step", ad::grad_check(
                                        [&]() {
                                          auto [h, c] = nn::lstm_step(x, h0, c0, p);
                                          return ad::sum_all(ad::mul(h, c));
                                        },
                                        leaves, kStep)});
  }
  {
    nn::LstmParams fwd = nn::make_lstm_params(3, 4, rng);
    nn::LstmParams bwd = nn::make_lstm_params(3, 4, rng);
    std::vector<ad::Var> leaves{fwd.w_input, fwd.b_input, fwd.w_forget, fwd.b_forget,
                                fwd.w_cell,  fwd.b_cell,  fwd.w_output, fwd.b_output,
                                bwd.w_input, bwd.b_input, bwd.w_forget, bwd.b_forget,
                                bwd.w_cell,  bwd.b_cell,  bwd.w_output, bwd.b_output};
    condition(leaves, rng);
    ad::Var x = ad::parameter(random_tensor({4, 3}, rng, 1.0));
    leaves.push_back(x);
    results.push_back({"bilstm_encode", ad::grad_check(
                                            [&]() {
                                              ad::Var h = nn::bilstm_encode(x, fwd, bwd);
                                              return ad::sum_all(ad::mul(h, h));
                                            },
                                            leaves, kStep)});
  }
  {
    nn::AttentionQuery query = nn::make_attention_query(5, rng);
    condition({query.w}, rng);
    ad::Var h = ad::parameter(random_tensor({4, 5}, rng, 1.0));
    results.push_back({"attention_pool",
                       ad::grad_check(
                           [&]() {
                             nn::AttentionResult r = nn::attention_pool(h, query);
                             return ad::sum_all(ad::mul(r.pooled, r.pooled));
                           },
                           {h, query.w}, kStep)});
  }
  {
    nn::MlpHead head = nn::make_mlp_head(5, 6, 3, 0.0, rng);
    std::vector<ad::Var> leaves{head.w_hidden, head.b_hidden, head.w_out, head.b_out};
    condition(leaves, rng);
    ad::Var z = ad::parameter(random_tensor({1, 5}, rng, 1.0));
    leaves.push_back(z);
    results.push_back({"mlp_head+cross_entropy",
                       ad::grad_check(
                           [&]() {
                             ad::Var logits = nn::mlp_head_forward(z, head, false, nullptr);
                             return nn::cross_entropy(logits, 1);
                           },
                           leaves, kStep)});
  }
  return results;
}

std::vector<ComponentResult> check_model() {
  std::mt19937_64 rng(20240503);
  nn::ModelConfig config;
  config.vocab_size = 10;
  config.embed_dim = 5;
  config.sidecar_dim = 0;
  config.hidden_dim = 4;
  config.mlp_hidden = 6;
  config.dropout = 0.0;  // gradient checking runs with dropout disabled
  config.fine_tune_embeddings = true;

  const std::vector<nn::TaskSpec> tasks = {
      {1, "intent", {"background", "method", "result"}, 1.0},
      {2, "worthiness", {"not_worthy", "worthy"}, 0.1},
      {3, "section", {"introduction", "related work", "method", "experiments", "conclusion"},
       0.05},
  };
  nn::ModelParams model = nn::init_params(config, tasks, 7);

  std::vector<ad::Var> leaves;
  for (const auto& [name, var] : model.named_tensors()) leaves.push_back(var);
  condition(leaves, rng);

  const std::vector<nn::EncodedInstance> batch = {
      {1, {2, 5, 7, 3}, 1, "gc-main", nullptr},
      {3, {4, 8, 2}, 2, "gc-section", nullptr},
  };
  const double err = ad::grad_check(
      [&]() { return nn::batch_loss(batch, model, false, nullptr); }, leaves, kStep);
  return {{"scaffold_model", err}};
}

std::vector<ComponentResult> check_scope(const std::string& scope) {
  std::vector<ComponentResult> results;
  const auto extend = [&results](std::vector<ComponentResult> more) {
    results.insert(results.end(), more.begin(), more.end());
  };
  if (scope == "ops") {
    extend(check_ops());
  } else if (scope == "layers") {
    extend(check_layers());
  } else if (scope == "model") {
    extend(check_model());
  } else if (scope == "all") {
    extend(check_ops());
    extend(check_layers());
    extend(check_model());
  } else {
    throw ContractError("gradcheck: unknown scope '" + scope + "' (ops|layers|model|all)");
  }
  return results;
}

}  // namespace scaffcite::gradcheck
