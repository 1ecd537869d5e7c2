#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <random>

#include "scaffcite/checkpoint.hpp"
#include "scaffcite/errors.hpp"
#include "scaffcite/gradcheck_suite.hpp"
#include "scaffcite/model.hpp"

using namespace scaffcite;
using namespace scaffcite::nn;

namespace {

std::vector<TaskSpec> three_tasks(double lambda2 = 0.1, double lambda3 = 0.05) {
  return {
      {1, "intent", {"background", "method", "result"}, 1.0},
      {2, "worthiness", {"not_worthy", "worthy"}, lambda2},
      {3, "section", data::section_labels(), lambda3},
  };
}

ModelConfig small_config() {
  ModelConfig c;
  c.vocab_size = 12;
  c.embed_dim = 6;
  c.hidden_dim = 5;
  c.mlp_hidden = 7;
  c.dropout = 0.0;
  return c;
}

}  // namespace

TEST_CASE("init_params is deterministic in (config, seed)") {
  ModelParams a = init_params(small_config(), three_tasks(), 42);
  ModelParams b = init_params(small_config(), three_tasks(), 42);
  ModelParams c = init_params(small_config(), three_tasks(), 43);

  auto na = a.named_tensors(), nb = b.named_tensors(), nc = c.named_tensors();
  REQUIRE(na.size() == nb.size());
  bool any_differs_from_c = false;
  for (std::size_t i = 0; i < na.size(); ++i) {
    CHECK(na[i].second->value.values() == nb[i].second->value.values());
    if (na[i].second->value.values() != nc[i].second->value.values()) any_differs_from_c = true;
  }
  CHECK(any_differs_from_c);
}

TEST_CASE("task registry rejects bad specs") {
  auto tasks = three_tasks();
  tasks[1].task_id = 5;
  CHECK_THROWS_AS(init_params(small_config(), tasks, 1), ContractError);

  auto weighted_main = three_tasks();
  weighted_main[0].lambda = 0.5;
  CHECK_THROWS_AS(init_params(small_config(), weighted_main, 1), ContractError);
}

TEST_CASE("forward gives per-task probability vectors that sum to one") {
  ModelParams params = init_params(small_config(), three_tasks(), 7);
  const std::vector<int> tokens{2, 5, 9};

  ForwardResult main = forward(tokens, 1, params, false, nullptr);
  CHECK(main.probs->value.numel() == 3);  // three intent classes
  ForwardResult worth = forward(tokens, 2, params, false, nullptr);
  CHECK(worth.probs->value.numel() == 2);
  ForwardResult section = forward(tokens, 3, params, false, nullptr);
  CHECK(section.probs->value.numel() == 5);

  for (const ForwardResult* r : {&main, &worth, &section}) {
    double total = 0.0;
    for (std::size_t i = 0; i < r->probs->value.numel(); ++i) total += r->probs->value[i];
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }

  CHECK_THROWS_AS(forward(tokens, 9, params, false, nullptr), ContractError);
}

TEST_CASE("zero-initialized heads give uniform probabilities for every task") {
  ModelParams params = init_params(small_config(), three_tasks(), 7);
  for (MlpHead& head : params.heads) {
    for (const ad::Var& v : {head.w_hidden, head.b_hidden, head.w_out, head.b_out}) {
      std::fill(v->value.values().begin(), v->value.values().end(), 0.0);
    }
  }
  for (int task_id : {1, 2, 3}) {
    ForwardResult r = forward({2, 5, 9}, task_id, params, false, nullptr);
    const std::size_t k = r.probs->value.numel();
    for (std::size_t i = 0; i < k; ++i) {
      CHECK(r.probs->value[i] == doctest::Approx(1.0 / static_cast<double>(k)).epsilon(1e-12));
    }
  }
}

TEST_CASE("shared encoder: the pooled vector is identical across task ids") {
  ModelParams params = init_params(small_config(), three_tasks(), 11);
  const std::vector<int> tokens{3, 4, 5, 6};
  ForwardResult a = forward(tokens, 1, params, false, nullptr);
  ForwardResult b = forward(tokens, 2, params, false, nullptr);
  ForwardResult c = forward(tokens, 3, params, false, nullptr);
  CHECK(a.pooled->value.values() == b.pooled->value.values());  // bitwise
  CHECK(a.pooled->value.values() == c.pooled->value.values());
}

TEST_CASE("batch_loss composes as weighted per-task sums") {
  const std::vector<EncodedInstance> batch = {
      {1, {2, 5, 9}, 0, "m1", nullptr},  {1, {4, 7}, 2, "m2", nullptr},
      {2, {3, 3, 6}, 1, "w1", nullptr},  {2, {8, 2}, 0, "w2", nullptr},
      {3, {5, 10, 11}, 3, "s1", nullptr}, {3, {9, 2, 4, 6}, 1, "s2", nullptr},
  };

  // per-task partial sums, measured independently through lambda = 1 models
  double partial[3];
  for (int task = 1; task <= 3; ++task) {
    ModelParams probe = init_params(small_config(), three_tasks(1.0, 1.0), 5);
    std::vector<EncodedInstance> only;
    for (const auto& inst : batch) {
      if (inst.task_id == task) only.push_back(inst);
    }
    partial[task - 1] = batch_loss(only, probe, false, nullptr)->value[0];
  }

  ModelParams weighted = init_params(small_config(), three_tasks(0.1, 0.05), 5);
  const double joint = batch_loss(batch, weighted, false, nullptr)->value[0];
  CHECK(joint ==
        doctest::Approx(partial[0] + 0.1 * partial[1] + 0.05 * partial[2]).epsilon(1e-12));

  // scaling lambda scales exactly the scaffold contribution
  ModelParams doubled = init_params(small_config(), three_tasks(0.2, 0.05), 5);
  const double joint2 = batch_loss(batch, doubled, false, nullptr)->value[0];
  CHECK(joint2 - joint == doctest::Approx(0.1 * partial[1]).epsilon(1e-9));

  // lambda = 0 degenerates to the main-only loss, bitwise
  ModelParams zeroed = init_params(small_config(), three_tasks(0.0, 0.0), 5);
  std::vector<EncodedInstance> main_only(batch.begin(), batch.begin() + 2);
  CHECK(batch_loss(batch, zeroed, false, nullptr)->value[0] ==
        batch_loss(main_only, zeroed, false, nullptr)->value[0]);

  // scaffold-only batch under lambda = 0 costs nothing
  std::vector<EncodedInstance> scaffold_only(batch.begin() + 2, batch.end());
  CHECK(batch_loss(scaffold_only, zeroed, false, nullptr)->value[0] == 0.0);

  // per-task contributions total the joint loss
  std::vector<double> contributions;
  batch_loss(batch, weighted, false, nullptr, &contributions);
  CHECK(contributions[0] + contributions[1] + contributions[2] ==
        doctest::Approx(joint).epsilon(1e-12));
}

TEST_CASE("batch_loss decomposes over batch concatenation") {
  ModelParams params = init_params(small_config(), three_tasks(), 5);
  const std::vector<EncodedInstance> first = {
      {1, {2, 5}, 0, "a", nullptr}, {2, {3, 6}, 1, "b", nullptr}};
  const std::vector<EncodedInstance> second = {
      {3, {5, 10}, 2, "c", nullptr}, {1, {4, 7, 9}, 1, "d", nullptr}};
  std::vector<EncodedInstance> joined = first;
  joined.insert(joined.end(), second.begin(), second.end());

  const double whole = batch_loss(joined, params, false, nullptr)->value[0];
  const double split = batch_loss(first, params, false, nullptr)->value[0] +
                       batch_loss(second, params, false, nullptr)->value[0];
  CHECK(whole == doctest::Approx(split).epsilon(1e-12));
}

TEST_CASE("batch_loss rejects labels outside the task's label set") {
  ModelParams params = init_params(small_config(), three_tasks(), 5);
  CHECK_THROWS_WITH_AS(
      batch_loss({{1, {2, 5}, 3, "oops", nullptr}}, params, false, nullptr),
      doctest::Contains("oops"), DataError);
}

TEST_CASE("predict argmax and tie handling") {
  ModelParams params = init_params(small_config(), three_tasks(), 13);
  Prediction pred = predict({2, 5, 9, 4}, params);
  // argmax of probabilities equals argmax of logits (softmax is monotone)
  int argmax = 0;
  for (std::size_t i = 1; i < pred.probabilities.size(); ++i) {
    if (pred.probabilities[i] > pred.probabilities[static_cast<std::size_t>(argmax)]) {
      argmax = static_cast<int>(i);
    }
  }
  CHECK(pred.label_index == argmax);
  CHECK(pred.label == params.tasks[0].labels[static_cast<std::size_t>(argmax)]);
  double total = 0.0;
  for (double w : pred.attention) total += w;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));

  // uniform probabilities: the tie-break picks the first class
  for (MlpHead& head : params.heads) {
    for (const ad::Var& v : {head.w_hidden, head.b_hidden, head.w_out, head.b_out}) {
      std::fill(v->value.values().begin(), v->value.values().end(), 0.0);
    }
  }
  Prediction uniform = predict({2, 5, 9, 4}, params);
  CHECK(uniform.label_index == 0);
  CHECK(uniform.label == "background");

  CHECK_THROWS_AS(predict({}, params), DataError);
}

TEST_CASE("sampled inference draws from the output distribution") {
  ModelParams params = init_params(small_config(), three_tasks(), 13);
  std::mt19937_64 rng(99);
  std::vector<std::size_t> histogram(3, 0);
  for (int i = 0; i < 300; ++i) {
    Prediction pred = predict({2, 5, 9, 4}, params, nullptr, "", true, &rng);
    ++histogram[static_cast<std::size_t>(pred.label_index)];
  }
  // near-uniform probabilities at init: every class should be drawn sometimes
  for (std::size_t count : histogram) CHECK(count > 10);
}

TEST_CASE("sidecar mode requires contextual vectors for every instance") {
  ModelConfig config = small_config();
  config.sidecar_dim = 4;
  ModelParams params = init_params(config, three_tasks(), 3);

  CHECK_THROWS_AS(forward({2, 5}, 1, params, false, nullptr), DataError);

  ContextVectors ctx(2, std::vector<double>(4, 0.25));
  ForwardResult r = forward({2, 5}, 1, params, false, nullptr, &ctx, "sc-1");
  CHECK(r.probs->value.numel() == 3);
}

TEST_CASE("full-model grad check stays under tolerance") {
  auto results = gradcheck::check_model();
  REQUIRE(results.size() == 1);
  CHECK(results[0].max_rel_error < 1e-4);
}

TEST_CASE("checkpoint round-trips bitwise") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "scf_ckpt_test";
  fs::create_directories(dir);
  const std::string first = (dir / "model.ckpt").string();
  const std::string second = (dir / "model2.ckpt").string();

  data::Vocabulary vocab = data::Vocabulary::build(
      {{"alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta", "iota", "kappa"}},
      1);
  ModelConfig config = small_config();
  config.vocab_size = vocab.size();
  ModelParams params = init_params(config, three_tasks(), 21);

  save_checkpoint(first, params, vocab);
  Checkpoint loaded = load_checkpoint(first);
  save_checkpoint(second, loaded.params, loaded.vocab);

  std::ifstream fa(first, std::ios::binary), fb(second, std::ios::binary);
  const std::string bytes_a((std::istreambuf_iterator<char>(fa)), {});
  const std::string bytes_b((std::istreambuf_iterator<char>(fb)), {});
  CHECK(bytes_a == bytes_b);
  CHECK(!bytes_a.empty());

  // loaded model behaves identically
  Prediction before = predict({2, 5, 9}, params);
  Prediction after = predict({2, 5, 9}, loaded.params);
  CHECK(before.probabilities == after.probabilities);
  CHECK(loaded.vocab.hash() == vocab.hash());

  fs::remove_all(dir);
}
