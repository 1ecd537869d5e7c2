#include "scaffcite/model.hpp"

#include <algorithm>

#include "scaffcite/errors.hpp"

namespace scaffcite::nn {

namespace {

void check_tasks(const std::vector<TaskSpec>& tasks) {
  if (tasks.empty()) throw ContractError("model: no tasks registered");
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const TaskSpec& t = tasks[i];
    if (t.task_id != static_cast<int>(i) + 1) {
      throw ContractError("model: task ids must be contiguous from 1, found id " +
                          std::to_string(t.task_id) + " at position " + std::to_string(i));
    }
    if (t.labels.empty()) throw ContractError("model: task " + std::to_string(t.task_id) +
                                              " has an empty label set");
    if (t.lambda < 0.0) throw ContractError("model: task " + std::to_string(t.task_id) +
                                            " has negative lambda");
  }
  if (tasks[0].lambda != 1.0) {
    throw ContractError("model: the main task's loss weight is fixed at 1");
  }
}

void append_lstm(std::vector<std::pair<std::string, ad::Var>>& out, const std::string& prefix,
                 const LstmParams& p) {
  out.emplace_back(prefix + ".w_input", p.w_input);
  out.emplace_back(prefix + ".b_input", p.b_input);
  out.emplace_back(prefix + ".w_forget", p.w_forget);
  out.emplace_back(prefix + ".b_forget", p.b_forget);
  out.emplace_back(prefix + ".w_cell", p.w_cell);
  out.emplace_back(prefix + ".b_cell", p.b_cell);
  out.emplace_back(prefix + ".w_output", p.w_output);
  out.emplace_back(prefix + ".b_output", p.b_output);
}

}  // namespace

const TaskSpec& ModelParams::task(int task_id) const {
  for (const TaskSpec& t : tasks) {
    if (t.task_id == task_id) return t;
  }
  throw ContractError("model: unknown task id " + std::to_string(task_id));
}

const MlpHead& ModelParams::head(int task_id) const {
  task(task_id);  // range check
  return heads[static_cast<std::size_t>(task_id) - 1];
}

std::vector<std::pair<std::string, ad::Var>> ModelParams::named_tensors() const {
  std::vector<std::pair<std::string, ad::Var>> out;
  out.emplace_back("embedding.rows", embedding.rows);
  append_lstm(out, "lstm.fwd", fwd);
  append_lstm(out, "lstm.bwd", bwd);
  out.emplace_back("attention.w", attention.w);
  for (std::size_t i = 0; i < heads.size(); ++i) {
    const std::string prefix = "head." + std::to_string(i + 1);
    out.emplace_back(prefix + ".w_hidden", heads[i].w_hidden);
    out.emplace_back(prefix + ".b_hidden", heads[i].b_hidden);
    out.emplace_back(prefix + ".w_out", heads[i].w_out);
    out.emplace_back(prefix + ".b_out", heads[i].b_out);
  }
  return out;
}

std::vector<ad::Var> ModelParams::trainable() const {
  std::vector<ad::Var> out;
  for (const auto& [name, var] : named_tensors()) {
    if (var->requires_grad) out.push_back(var);
  }
  return out;
}

void ModelParams::zero_grads() const {
  for (const auto& [name, var] : named_tensors()) var->value.zero_grad();
}

std::vector<ad::Tensor> ModelParams::snapshot_values() const {
  std::vector<ad::Tensor> out;
  for (const auto& [name, var] : named_tensors()) {
    ad::Tensor copy = var->value;
    copy.drop_grad();
    out.push_back(std::move(copy));
  }
  return out;
}

void ModelParams::restore_values(const std::vector<ad::Tensor>& values) {
  auto named = named_tensors();
  if (values.size() != named.size()) {
    throw ContractError("model: snapshot holds " + std::to_string(values.size()) +
                        " tensors, expected " + std::to_string(named.size()));
  }
  for (std::size_t i = 0; i < named.size(); ++i) {
    if (values[i].shape() != named[i].second->value.shape()) {
      throw ContractError("model: snapshot tensor '" + named[i].first + "' has shape " +
                          values[i].shape_str() + ", expected " +
                          named[i].second->value.shape_str());
    }
    named[i].second->value.values() = values[i].values();
  }
}

ModelParams ModelParams::clone() const {
  ModelParams copy;
  copy.config = config;
  copy.tasks = tasks;
  auto fresh = [](const ad::Var& v) {
    ad::Tensor t = v->value;
    t.drop_grad();
    return ad::leaf(std::move(t), v->requires_grad);
  };
  copy.embedding = {embedding.vocab_size, embedding.dim, fresh(embedding.rows),
                    embedding.trainable};
  auto clone_lstm = [&fresh](const LstmParams& p) {
    LstmParams c;
    c.input_dim = p.input_dim;
    c.hidden_dim = p.hidden_dim;
    c.w_input = fresh(p.w_input);
    c.b_input = fresh(p.b_input);
    c.w_forget = fresh(p.w_forget);
    c.b_forget = fresh(p.b_forget);
    c.w_cell = fresh(p.w_cell);
    c.b_cell = fresh(p.b_cell);
    c.w_output = fresh(p.w_output);
    c.b_output = fresh(p.b_output);
    return c;
  };
  copy.fwd = clone_lstm(fwd);
  copy.bwd = clone_lstm(bwd);
  copy.attention = {fresh(attention.w)};
  for (const MlpHead& h : heads) {
    MlpHead c;
    c.w_hidden = fresh(h.w_hidden);
    c.b_hidden = fresh(h.b_hidden);
    c.w_out = fresh(h.w_out);
    c.b_out = fresh(h.b_out);
    c.dropout_rate = h.dropout_rate;
    copy.heads.push_back(std::move(c));
  }
  return copy;
}

ModelParams init_params(const ModelConfig& config, const std::vector<TaskSpec>& tasks,
                        std::uint64_t seed) {
  check_tasks(tasks);
  if (config.vocab_size < 2 || config.embed_dim == 0 || config.hidden_dim == 0 ||
      config.mlp_hidden == 0) {
    throw ContractError("model: config dimensions must be positive");
  }
  std::mt19937_64 rng(seed);
  ModelParams p;
  p.config = config;
  p.tasks = tasks;
  p.embedding =
      make_embedding_table(config.vocab_size, config.embed_dim, config.fine_tune_embeddings, rng);
  p.fwd = make_lstm_params(config.input_dim(), config.hidden_dim, rng);
  p.bwd = make_lstm_params(config.input_dim(), config.hidden_dim, rng);
  p.attention = make_attention_query(config.encoding_dim(), rng);
  for (const TaskSpec& t : tasks) {
    p.heads.push_back(make_mlp_head(config.encoding_dim(), config.mlp_hidden, t.labels.size(),
                                    config.dropout, rng));
  }
  return p;
}

ForwardResult forward(const std::vector<int>& token_ids, int task_id, const ModelParams& params,
                      bool training, std::mt19937_64* rng, const ContextVectors* sidecar,
                      const std::string& instance_id) {
  const MlpHead& task_head = params.head(task_id);
  if (params.config.sidecar_dim > 0 && sidecar == nullptr) {
    throw DataError("model runs in sidecar mode but instance '" + instance_id +
                    "' has no contextual vectors");
  }
  ad::Var x = embed_sequence(token_ids, params.embedding,
                             params.config.sidecar_dim > 0 ? sidecar : nullptr, instance_id);
  ad::Var h = bilstm_encode(x, params.fwd, params.bwd);
  AttentionResult pooled = attention_pool(h, params.attention);
  ad::Var logits = mlp_head_forward(pooled.pooled, task_head, training, rng);
  return {ad::softmax_last_axis(logits), pooled.weights, pooled.pooled};
}

ad::Var batch_loss(const std::vector<EncodedInstance>& batch, const ModelParams& params,
                   bool training, std::mt19937_64* rng,
                   std::vector<double>* task_contributions) {
  if (task_contributions) task_contributions->assign(params.tasks.size(), 0.0);
  ad::Var total;
  for (const EncodedInstance& inst : batch) {
    const TaskSpec& task = params.task(inst.task_id);
    if (inst.gold < 0 || static_cast<std::size_t>(inst.gold) >= task.labels.size()) {
      throw DataError("instance '" + inst.id + "' has label index " + std::to_string(inst.gold) +
                      " outside task " + std::to_string(task.task_id) + "'s label set");
    }
    const double weight = task.task_id == 1 ? 1.0 : task.lambda;
    if (weight == 0.0) continue;  // contributes nothing to the joint loss

    const MlpHead& task_head = params.head(inst.task_id);
    ad::Var x = embed_sequence(inst.token_ids, params.embedding,
                               params.config.sidecar_dim > 0 ? inst.sidecar : nullptr, inst.id);
    ad::Var h = bilstm_encode(x, params.fwd, params.bwd);
    AttentionResult pooled = attention_pool(h, params.attention);
    ad::Var logits = mlp_head_forward(pooled.pooled, task_head, training, rng);
    ad::Var loss = cross_entropy(logits, static_cast<std::size_t>(inst.gold));
    if (weight != 1.0) loss = ad::scale(loss, weight);
    if (task_contributions) {
      (*task_contributions)[static_cast<std::size_t>(inst.task_id) - 1] += loss->value[0];
    }
    total = total ? ad::add(total, loss) : loss;
  }
  return total ? total : ad::constant(ad::Tensor::scalar(0.0));
}

namespace {

int resolve_label(const std::vector<std::string>& labels, const std::string& label,
                  const std::string& id) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return static_cast<int>(i);
  }
  throw DataError("instance '" + id + "' carries label '" + label +
                  "' outside the declared label set");
}

}  // namespace

std::vector<EncodedInstance> encode_citations(const std::vector<data::CitationInstance>& instances,
                                              const data::Vocabulary& vocab,
                                              const std::vector<std::string>& labels,
                                              const data::SidecarStore* sidecar) {
  std::vector<EncodedInstance> out;
  out.reserve(instances.size());
  for (const data::CitationInstance& inst : instances) {
    EncodedInstance enc;
    enc.task_id = 1;
    enc.id = inst.id;
    enc.token_ids = vocab.encode(data::tokenize(inst.text));
    if (enc.token_ids.empty()) {
      throw DataError("instance '" + inst.id + "' tokenizes to an empty sequence");
    }
    enc.gold = resolve_label(labels, inst.label, inst.id);
    if (sidecar) enc.sidecar = &sidecar->require(inst.id, enc.token_ids.size());
    out.push_back(std::move(enc));
  }
  return out;
}

std::vector<EncodedInstance> encode_scaffolds(const std::vector<data::ScaffoldInstance>& instances,
                                              const data::Vocabulary& vocab,
                                              const std::vector<std::string>& labels) {
  std::vector<EncodedInstance> out;
  out.reserve(instances.size());
  std::size_t line = 0;
  for (const data::ScaffoldInstance& inst : instances) {
    ++line;
    EncodedInstance enc;
    enc.task_id = inst.task_id;
    enc.id = "scaffold-" + std::to_string(inst.task_id) + "-" + std::to_string(line);
    enc.token_ids = vocab.encode(data::tokenize(inst.text));
    if (enc.token_ids.empty()) {
      throw DataError("instance '" + enc.id + "' tokenizes to an empty sequence");
    }
    enc.gold = resolve_label(labels, inst.label, enc.id);
    out.push_back(std::move(enc));
  }
  return out;
}

Prediction predict(const std::vector<int>& token_ids, const ModelParams& params,
                   const ContextVectors* sidecar, const std::string& instance_id, bool sample,
                   std::mt19937_64* rng) {
  if (token_ids.empty()) {
    throw DataError("cannot predict on the empty token sequence of instance '" + instance_id +
                    "'");
  }
  ForwardResult out = forward(token_ids, 1, params, false, nullptr, sidecar, instance_id);
  Prediction pred;
  pred.probabilities = out.probs->value.values();
  pred.attention = out.attention->value.values();

  if (sample) {
    if (!rng) throw ContractError("predict: sampling needs an rng");
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    double u = dist(*rng), acc = 0.0;
    pred.label_index = static_cast<int>(pred.probabilities.size()) - 1;
    for (std::size_t i = 0; i < pred.probabilities.size(); ++i) {
      acc += pred.probabilities[i];
      if (u < acc) {
        pred.label_index = static_cast<int>(i);
        break;
      }
    }
  } else {
    pred.label_index = 0;
    for (std::size_t i = 1; i < pred.probabilities.size(); ++i) {
      if (pred.probabilities[i] > pred.probabilities[pred.label_index]) {
        pred.label_index = static_cast<int>(i);
      }
    }
  }
  pred.label = params.tasks[0].labels[static_cast<std::size_t>(pred.label_index)];
  return pred;
}

}  // namespace scaffcite::nn
