#include "scaffcite/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "scaffcite/errors.hpp"
#include "scaffcite/metrics.hpp"

namespace scaffcite::training {

void TrainConfig::validate() const {
  if (patience < 1) throw ContractError("train config: patience must be >= 1");
  if (clip_threshold <= 0.0) throw ContractError("train config: clip threshold must be > 0");
  if (lambda2 < 0.0 || lambda3 < 0.0) {
    throw ContractError("train config: scaffold loss weights must be nonnegative");
  }
  if (batch_size < 1) throw ContractError("train config: batch size must be >= 1");
  if (max_epochs < 1) throw ContractError("train config: max epochs must be >= 1");
}

CyclingSampler::CyclingSampler(std::vector<nn::EncodedInstance> data) : data_(std::move(data)) {
  order_.resize(data_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  cursor_ = order_.size();  // first next() reshuffles
}

nn::EncodedInstance CyclingSampler::next(std::mt19937_64& rng) {
  if (data_.empty()) throw ContractError("sampler: empty scaffold dataset");
  if (cursor_ >= order_.size()) {
    std::shuffle(order_.begin(), order_.end(), rng);
    cursor_ = 0;
  }
  return data_[order_[cursor_++]];
}

namespace {

std::vector<Batch> epoch_batches(const std::vector<nn::EncodedInstance>& main_data,
                                 std::vector<CyclingSampler>& samplers, std::size_t batch_size,
                                 std::mt19937_64& rng) {
  if (main_data.empty()) throw ContractError("batching: empty main dataset");
  if (batch_size < 1) throw ContractError("batching: batch size must be >= 1");

  std::vector<std::size_t> order(main_data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Batch> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t slice = std::min(batch_size, order.size() - start);
    Batch batch;
    batch.reserve(slice * (1 + samplers.size()));
    for (std::size_t i = 0; i < slice; ++i) batch.push_back(main_data[order[start + i]]);
    // scaffold slices match the main slice size so composition stays equal
    for (CyclingSampler& sampler : samplers) {
      for (std::size_t i = 0; i < slice; ++i) batch.push_back(sampler.next(rng));
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

}  // namespace

std::vector<Batch> make_mixed_batches(
    const std::vector<nn::EncodedInstance>& main_data,
    const std::vector<std::vector<nn::EncodedInstance>>& scaffold_data, std::size_t batch_size,
    std::mt19937_64& rng) {
  std::vector<CyclingSampler> samplers;
  for (const auto& dataset : scaffold_data) samplers.emplace_back(dataset);
  return epoch_batches(main_data, samplers, batch_size, rng);
}

void clip_gradients(const std::vector<ad::Var>& params, double threshold) {
  if (threshold <= 0.0) throw ContractError("clip: threshold must be > 0");
  for (const ad::Var& p : params) {
    for (double& g : p->value.grad()) {
      g = std::clamp(g, -threshold, threshold);
    }
  }
}

EarlyStopper::EarlyStopper(std::size_t patience) : patience_(patience) {
  if (patience < 1) throw ContractError("early stopping: patience must be >= 1");
}

bool EarlyStopper::record(double dev_score) {
  ++epoch_;
  if (best_epoch_ == 0 || dev_score > best_score_) {
    best_epoch_ = epoch_;
    best_score_ = dev_score;
    stale_ = 0;
    return true;
  }
  ++stale_;
  return false;
}

OptimizerState OptimizerState::zeros_like(const std::vector<ad::Var>& params) {
  OptimizerState state;
  for (const ad::Var& p : params) {
    state.avg_sq_grad.emplace_back(p->value.numel(), 0.0);
    state.avg_sq_update.emplace_back(p->value.numel(), 0.0);
  }
  return state;
}

void adadelta_step(const std::vector<ad::Var>& params, OptimizerState& state, double rho,
                   double eps) {
  if (state.avg_sq_grad.size() != params.size()) {
    throw ContractError("adadelta: state tracks " + std::to_string(state.avg_sq_grad.size()) +
                        " tensors, got " + std::to_string(params.size()));
  }
  for (std::size_t p = 0; p < params.size(); ++p) {
    ad::Tensor& t = params[p]->value;
    if (state.avg_sq_grad[p].size() != t.numel()) {
      throw ContractError("adadelta: state shape mismatch at tensor " + std::to_string(p));
    }
    const std::vector<double>& g = t.grad();
    std::vector<double>& eg2 = state.avg_sq_grad[p];
    std::vector<double>& ex2 = state.avg_sq_update[p];
    for (std::size_t i = 0; i < t.numel(); ++i) {
      eg2[i] = rho * eg2[i] + (1.0 - rho) * g[i] * g[i];
      const double delta = -std::sqrt((ex2[i] + eps) / (eg2[i] + eps)) * g[i];
      ex2[i] = rho * ex2[i] + (1.0 - rho) * delta * delta;
      t[i] += delta;
    }
  }
}

namespace {

double evaluate_dev(const nn::ModelParams& model, const std::vector<nn::EncodedInstance>& dev) {
  std::vector<int> golds, preds;
  golds.reserve(dev.size());
  preds.reserve(dev.size());
  for (const nn::EncodedInstance& inst : dev) {
    nn::Prediction pred = nn::predict(inst.token_ids, model, inst.sidecar, inst.id);
    golds.push_back(inst.gold);
    preds.push_back(pred.label_index);
  }
  return metrics::macro_f1(golds, preds, model.tasks[0].labels);
}

}  // namespace

TrainResult train(nn::ModelParams& model, const std::vector<nn::EncodedInstance>& main_train,
                  const std::vector<std::vector<nn::EncodedInstance>>& scaffold_data,
                  const std::vector<nn::EncodedInstance>& dev, const TrainConfig& config) {
  config.validate();
  if (main_train.empty()) throw ContractError("train: empty main dataset");
  if (dev.empty()) throw ContractError("train: empty dev set");

  const std::vector<ad::Var> trainable = model.trainable();
  OptimizerState state = OptimizerState::zeros_like(trainable);

  // dedicated streams so batching and dropout draws cannot interleave
  std::mt19937_64 batch_rng(config.seed ^ 0x9e3779b97f4a7c15ull);
  std::mt19937_64 dropout_rng(config.seed ^ 0xc2b2ae3d27d4eb4full);

  std::vector<CyclingSampler> samplers;
  for (const auto& dataset : scaffold_data) samplers.emplace_back(dataset);

  const std::size_t num_tasks = model.tasks.size();
  TrainHistory history;
  std::vector<ad::Tensor> best_snapshot = model.snapshot_values();
  EarlyStopper stopper(config.patience);

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();

    std::vector<double> task_loss(num_tasks, 0.0);
    std::vector<double> batch_contributions;
    for (Batch& batch : epoch_batches(main_train, samplers, config.batch_size, batch_rng)) {
      model.zero_grads();
      ad::Var loss =
          nn::batch_loss(batch, model, /*training=*/true, &dropout_rng, &batch_contributions);
      ad::backward(loss);
      clip_gradients(trainable, config.clip_threshold);
      adadelta_step(trainable, state, config.adadelta_rho, config.adadelta_eps);
      for (std::size_t t = 0; t < num_tasks; ++t) task_loss[t] += batch_contributions[t];
    }

    const double dev_f1 = evaluate_dev(model, dev);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    history.epochs.push_back({epoch, task_loss, dev_f1, seconds});

    if (stopper.record(dev_f1)) best_snapshot = model.snapshot_values();
    if (stopper.should_stop()) break;
  }
  history.best_epoch = stopper.best_epoch();
  history.best_dev_f1 = stopper.best_score();

  nn::ModelParams best = model.clone();
  best.restore_values(best_snapshot);
  return {std::move(best), std::move(history)};
}

GridResult grid_search_lambda(const std::function<double(double, double)>& train_and_score,
                              const std::vector<double>& lambda2_values,
                              const std::vector<double>& lambda3_values, bool axis_aligned) {
  for (const auto& values : {lambda2_values, lambda3_values}) {
    if (values.empty()) throw ContractError("grid search: empty lambda value list");
    for (double v : values) {
      if (v < 0.0 || v > 0.3) {
        throw ContractError("grid search: lambda " + std::to_string(v) + " outside [0, 0.3]");
      }
    }
  }

  GridResult result;
  result.best_dev_f1 = -1.0;
  const auto consider = [&](double l2, double l3) {
    const double f1 = train_and_score(l2, l3);
    result.table.push_back({l2, l3, f1});
    if (f1 > result.best_dev_f1) {  // strict: ties keep the earlier, smaller lambdas
      result.best_dev_f1 = f1;
      result.best_lambda2 = l2;
      result.best_lambda3 = l3;
    }
  };

  std::vector<double> l2_sorted = lambda2_values, l3_sorted = lambda3_values;
  std::sort(l2_sorted.begin(), l2_sorted.end());
  std::sort(l3_sorted.begin(), l3_sorted.end());

  if (axis_aligned) {
    for (double l2 : l2_sorted) consider(l2, 0.0);
    const double winner_l2 = result.best_lambda2;
    for (double l3 : l3_sorted) {
      if (l3 == 0.0) continue;  // (winner_l2, 0) was scored in the first sweep
      consider(winner_l2, l3);
    }
  } else {
    for (double l2 : l2_sorted) {
      for (double l3 : l3_sorted) consider(l2, l3);
    }
  }
  return result;
}

}  // namespace scaffcite::training
