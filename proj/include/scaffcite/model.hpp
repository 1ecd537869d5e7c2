#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scaffcite/data.hpp"
#include "scaffcite/layers.hpp"

namespace scaffcite::nn {

/// One classification task. Task 1 is the main citation-intent task; its
/// loss weight is fixed at 1.
struct TaskSpec {
  int task_id = 1;
  std::string name;
  std::vector<std::string> labels;
  double lambda = 1.0;
};

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 100;   // static word-vector width (d1 without sidecar)
  std::size_t sidecar_dim = 0;   // contextual vector width, 0 = static only
  std::size_t hidden_dim = 50;   // BiLSTM hidden size per direction (d2)
  std::size_t mlp_hidden = 20;
  double dropout = 0.2;
  bool fine_tune_embeddings = false;

  std::size_t input_dim() const { return embed_dim + sidecar_dim; }
  std::size_t encoding_dim() const { return 2 * hidden_dim; }
};

/// All learnable weights. The encoder (embeddings, BiLSTM, attention query)
/// exists once and is shared by every task head.
struct ModelParams {
  ModelConfig config;
  std::vector<TaskSpec> tasks;  // ascending task_id, main task first
  TokenEmbeddingTable embedding;
  LstmParams fwd, bwd;
  AttentionQuery attention;
  std::vector<MlpHead> heads;  // aligned with tasks

  const TaskSpec& task(int task_id) const;
  const MlpHead& head(int task_id) const;

  /// Every tensor in a fixed documented order (checkpoint and optimizer
  /// layout).
  std::vector<std::pair<std::string, ad::Var>> named_tensors() const;
  /// Tensors receiving gradient updates; excludes frozen embeddings.
  std::vector<ad::Var> trainable() const;
  void zero_grads() const;

  /// Snapshot / restore of raw tensor values in named_tensors() order.
  std::vector<ad::Tensor> snapshot_values() const;
  void restore_values(const std::vector<ad::Tensor>& values);
  ModelParams clone() const;
};

/// Deterministic in (config, tasks, seed); equal arguments give bitwise
/// identical parameters.
ModelParams init_params(const ModelConfig& config, const std::vector<TaskSpec>& tasks,
                        std::uint64_t seed);

struct ForwardResult {
  ad::Var probs;      // 1 x |labels of task|
  ad::Var attention;  // 1 x n
  ad::Var pooled;     // 1 x 2*d2
};

/// Embed -> BiLSTM -> attention pool -> task head -> softmax.
ForwardResult forward(const std::vector<int>& token_ids, int task_id, const ModelParams& params,
                      bool training, std::mt19937_64* rng,
                      const ContextVectors* sidecar = nullptr, const std::string& instance_id = "");

/// One labeled training item, already encoded against the vocabulary.
struct EncodedInstance {
  int task_id = 1;
  std::vector<int> token_ids;
  int gold = 0;
  std::string id;
  const ContextVectors* sidecar = nullptr;
};

/// Joint loss: sum over instances of lambda(task) * cross-entropy through
/// that task's head. Tasks with lambda 0 (other than the main task)
/// contribute nothing, exactly. When task_contributions is given it receives
/// one lambda-weighted loss sum per task (their total equals the returned
/// loss).
ad::Var batch_loss(const std::vector<EncodedInstance>& batch, const ModelParams& params,
                   bool training, std::mt19937_64* rng,
                   std::vector<double>* task_contributions = nullptr);

/// Tokenize, look up vocabulary ids, and resolve labels against the task's
/// label set. Instances that tokenize to nothing raise a DataError naming
/// the instance. A sidecar store, when given, must cover every instance.
std::vector<EncodedInstance> encode_citations(const std::vector<data::CitationInstance>& instances,
                                              const data::Vocabulary& vocab,
                                              const std::vector<std::string>& labels,
                                              const data::SidecarStore* sidecar = nullptr);

std::vector<EncodedInstance> encode_scaffolds(const std::vector<data::ScaffoldInstance>& instances,
                                              const data::Vocabulary& vocab,
                                              const std::vector<std::string>& labels);

struct Prediction {
  int label_index = 0;
  std::string label;
  std::vector<double> probabilities;
  std::vector<double> attention;
};

/// Main-task argmax prediction; exact ties go to the lowest class index.
/// With sample=true the label is drawn from the probability vector instead.
Prediction predict(const std::vector<int>& token_ids, const ModelParams& params,
                   const ContextVectors* sidecar = nullptr, const std::string& instance_id = "",
                   bool sample = false, std::mt19937_64* rng = nullptr);

}  // namespace scaffcite::nn
