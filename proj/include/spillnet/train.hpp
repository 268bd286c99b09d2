#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spillnet/features.hpp"
#include "spillnet/model.hpp"
#include "spillnet/tensor.hpp"

namespace spillnet::train {

using tensor::Tensor;

struct TrainConfig {
  model::CoreKind solver = model::CoreKind::RK4;
  double alpha = 0.05;
  double beta = 0.5;
  double lr = 3e-4;
  int max_epochs = 150;
  int patience = 15;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double min_delta = 1e-5;
  double val_fraction = 0.2;
  model::ModelConfig model;  // core is overridden by `solver`

  /// Per-solver alpha, lr and patience; everything else at its default.
  static TrainConfig defaults_for(model::CoreKind solver);
  void validate() const;
};

/// Overrides only the fields present in the JSON object; "solver" re-seeds the per-solver defaults first.
TrainConfig train_config_from_json(std::string_view text, TrainConfig base);
std::string train_config_to_json(const TrainConfig& config);

struct LossParts {
  Tensor total;
  double mse = 0.0;
  double smooth = 0.0;
  double area = 0.0;
};

/// pred and target hold one batch x 28 tensor per horizon, horizons ascending.
/// total = mse + alpha * smooth + beta * area.
LossParts loss_total(const std::vector<Tensor>& pred, const std::vector<Tensor>& target, double alpha, double beta);

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  long step = 0;
};

/// Decoupled decay then bias-corrected Adam. A parameter with no gradient is
/// treated as having a zero gradient.
void adamw_step(std::span<Tensor> params, AdamState& state, const AdamWConfig& config);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
  double val_mse = 0.0;
};

struct TrainResult {
  model::Model model;
  features::TargetScaling scaling;
  std::vector<EpochRecord> history;  // epoch 0 is the untrained evaluation
  int best_epoch = 0;
  double best_val_loss = 0.0;
  bool stopped_early = false;
};

/// Windows carrying a target for every configured horizon.
std::vector<features::FeatureSequence> complete_windows(std::span<const features::FeatureSequence> data,
                                                        const std::vector<int>& horizons);

struct Split {
  std::vector<features::FeatureSequence> train;
  std::vector<features::FeatureSequence> validation;
};

/// Per spill, windows sorted by issue time; the earliest (1 - val_fraction) go to training.
Split time_block_split(std::span<const features::FeatureSequence> data, double val_fraction);

/// Normalized flat windows and per-horizon targets, ready for Model::forward.
struct Batchable {
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<std::vector<double>>> targets;  // [horizon][sample] -> 28 values
};

Batchable prepare(std::span<const features::FeatureSequence> data, const features::TargetScaling& scaling,
                  const std::vector<int>& horizons);

/// Mean loss (and mse component) of a model over a prepared set, no gradients.
LossParts evaluate_loss(const model::Model& model, const Batchable& data, double alpha, double beta,
                        std::size_t batch_size);

/// Throws EmptyDataset, NumericalError (with the epoch index).
TrainResult train_model(std::span<const features::FeatureSequence> dataset, const TrainConfig& config);

/// epoch,train_loss,val_loss,lr,val_mse
std::string history_csv(const std::vector<EpochRecord>& history);

}  // namespace spillnet::train
