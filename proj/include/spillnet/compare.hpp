#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "spillnet/evaluate.hpp"
#include "spillnet/features.hpp"
#include "spillnet/ingest.hpp"
#include "spillnet/model.hpp"
#include "spillnet/stats.hpp"
#include "spillnet/train.hpp"

namespace spillnet::compare {

/// Held-out windows of one spill and the observations they are scored against.
struct EvalSpill {
  std::vector<features::FeatureSequence> windows;
  std::vector<ingest::SpillObservation> truth;
};

struct CompareConfig {
  std::vector<model::CoreKind> cores{model::CoreKind::RK4, model::CoreKind::Euler, model::CoreKind::FusedExplicit,
                                     model::CoreKind::LstmBaseline};
  std::uint64_t seed = 0;
  std::optional<int> max_epochs;  // same budget for every core when set
  std::optional<model::ModelConfig> model;  // core overridden per row
  int cells_per_axis = 128;
  std::size_t resamples = 2000;
};

struct SolverRow {
  model::CoreKind core = model::CoreKind::RK4;
  std::string name;
  int best_epoch = 0;
  int epochs_run = 0;
  double best_val_loss = 0.0;
  double area_mae = 0.0;
  double centroid_disp_km = 0.0;
  double spatial_accuracy = 0.0;
  stats::Interval spatial_accuracy_ci;
  double temporal_consistency = 0.0;
  double cv_percent = 0.0;
  stats::Summary area;  // first-horizon predicted areas
  std::vector<double> abs_errors;  // every scored row, same order for every core
};

struct PairedTest {
  std::string a;
  std::string b;
  std::optional<stats::TTest> t;
  std::optional<stats::WilcoxonResult> wilcoxon;
};

struct Comparison {
  std::vector<SolverRow> rows;
  std::vector<PairedTest> tests;  // each LTC core against the LSTM on absolute area errors

  const SolverRow& row(model::CoreKind core) const;
  nlohmann::json to_json() const;
  std::string to_csv() const;
};

/// Windows and hourly truth of one synthetic scenario replica.
EvalSpill scenario_spill(int kind, std::uint64_t seed, int duration_h = 72);

/// Forecast records for every window of a spill.
std::vector<evaluate::ForecastRecord> forecast(const model::Model& model, const features::TargetScaling& scaling,
                                               std::span<const features::FeatureSequence> windows);

/// Trains each core on `train_data` with its own default hyperparameters and a
/// seed derived from the master seed, then scores every core on the same spills.
Comparison compare_solvers(std::span<const features::FeatureSequence> train_data, std::span<const EvalSpill> eval,
                           const CompareConfig& config);

}  // namespace spillnet::compare
