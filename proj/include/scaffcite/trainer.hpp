#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "scaffcite/model.hpp"

namespace scaffcite::training {

struct TrainConfig {
  std::size_t embed_dim = 100;
  std::size_t hidden_dim = 50;
  std::size_t mlp_hidden = 20;
  double dropout = 0.2;
  double lambda2 = 0.0;
  double lambda3 = 0.0;
  std::size_t batch_size = 8;  // instances PER TASK in each mixed batch
  std::size_t patience = 5;
  std::size_t max_epochs = 50;
  std::uint64_t seed = 13370;
  double clip_threshold = 5.0;
  double adadelta_rho = 0.95;
  double adadelta_eps = 1e-6;
  bool fine_tune_embeddings = false;

  void validate() const;
};

using Batch = std::vector<nn::EncodedInstance>;

/// Mixed mini-batches for one epoch: one pass over the main dataset in
/// shuffled order, ceil(|main|/b) batches, each carrying the same number of
/// instances from every task (the final batch may be smaller when the main
/// dataset does not divide evenly). Scaffold datasets are sampled without
/// replacement and reshuffled when exhausted.
std::vector<Batch> make_mixed_batches(
    const std::vector<nn::EncodedInstance>& main_data,
    const std::vector<std::vector<nn::EncodedInstance>>& scaffold_data, std::size_t batch_size,
    std::mt19937_64& rng);

/// Without-replacement sampler that reshuffles and cycles across epochs.
class CyclingSampler {
 public:
  explicit CyclingSampler(std::vector<nn::EncodedInstance> data);
  nn::EncodedInstance next(std::mt19937_64& rng);

 private:
  std::vector<nn::EncodedInstance> data_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

/// Every gradient entry clamped to [-threshold, +threshold].
void clip_gradients(const std::vector<ad::Var>& params, double threshold);

/// Best-so-far tracking with patience: training stops once the dev score
/// has not improved for `patience` consecutive epochs. Ties keep the
/// earlier epoch.
class EarlyStopper {
 public:
  explicit EarlyStopper(std::size_t patience);
  /// Records one epoch's dev score; returns true when it is a new best.
  bool record(double dev_score);
  bool should_stop() const { return stale_ >= patience_; }
  std::size_t best_epoch() const { return best_epoch_; }  // 1-based, 0 before any record
  double best_score() const { return best_score_; }

 private:
  std::size_t patience_;
  std::size_t epoch_ = 0;
  std::size_t best_epoch_ = 0;
  double best_score_ = 0.0;
  std::size_t stale_ = 0;
};

/// Running averages of squared gradients and squared updates, mirroring the
/// trainable parameter list entry for entry. Zero initialized.
struct OptimizerState {
  std::vector<std::vector<double>> avg_sq_grad;
  std::vector<std::vector<double>> avg_sq_update;

  static OptimizerState zeros_like(const std::vector<ad::Var>& params);
};

void adadelta_step(const std::vector<ad::Var>& params, OptimizerState& state, double rho,
                   double eps);

struct EpochRecord {
  std::size_t epoch = 0;          // 1-based
  std::vector<double> task_loss;  // lambda-weighted loss sum per task; totals the joint loss
  double dev_macro_f1 = 0.0;
  double seconds = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 1-based; argmax dev F1, earliest on ties
  double best_dev_f1 = 0.0;
};

struct TrainResult {
  nn::ModelParams best_params;
  TrainHistory history;
};

/// Joint training loop: mixed batches, joint loss, backward, entrywise
/// clipping, AdaDelta. After each epoch the main task's dev macro F1 decides
/// the best snapshot; training stops after `patience` consecutive
/// non-improving epochs or at max_epochs. Returns the best snapshot.
TrainResult train(nn::ModelParams& model, const std::vector<nn::EncodedInstance>& main_train,
                  const std::vector<std::vector<nn::EncodedInstance>>& scaffold_data,
                  const std::vector<nn::EncodedInstance>& dev, const TrainConfig& config);

struct GridPoint {
  double lambda2 = 0.0;
  double lambda3 = 0.0;
  double dev_f1 = 0.0;
};

struct GridResult {
  std::vector<GridPoint> table;
  double best_lambda2 = 0.0;
  double best_lambda3 = 0.0;
  double best_dev_f1 = 0.0;
};

/// Trains one model per grid point via the supplied closure and reports the
/// dev-F1 surface and argmax; ties go to the smaller lambdas. Axis-aligned
/// mode sweeps lambda2 with lambda3 = 0 and then lambda3 with the winner.
/// Grid values must lie within [0, 0.3].
GridResult grid_search_lambda(const std::function<double(double, double)>& train_and_score,
                              const std::vector<double>& lambda2_values,
                              const std::vector<double>& lambda3_values, bool axis_aligned);

}  // namespace scaffcite::training
