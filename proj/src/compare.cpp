#include "spillnet/compare.hpp"

#include <cstdio>

#include "spillnet/error.hpp"
#include "spillnet/log.hpp"
#include "spillnet/rng.hpp"
#include "spillnet/scenario.hpp"

namespace spillnet::compare {

const SolverRow& Comparison::row(model::CoreKind core) const {
  for (const auto& r : rows)
    if (r.core == core) return r;
  throw Error(ErrorCode::ConfigError, "no row for " + std::string(model::to_string(core)));
}

EvalSpill scenario_spill(int kind, std::uint64_t seed, int duration_h) {
  scenario::ScenarioConfig sc;
  sc.kind = kind;
  sc.seed = seed;
  sc.duration_h = duration_h;
  sc.params.spill_id = "eval-" + std::to_string(kind) + "-" + std::to_string(seed);
  const auto frames = scenario::generate_scenario(sc);
  EvalSpill out;
  out.truth = scenario::observations_of(frames);
  const auto series = features::feature_series(out.truth, scenario::env_of(frames));
  out.windows = features::build_sequences(series, features::ScaleClass::Short, sc.params.spill_id);
  return out;
}

std::vector<evaluate::ForecastRecord> forecast(const model::Model& model, const features::TargetScaling& scaling,
                                               std::span<const features::FeatureSequence> windows) {
  std::vector<std::vector<double>> inputs;
  for (const auto& s : windows) {
    std::vector<double> flat;
    for (const auto& row : s.window) {
      const auto z = scaling.normalize_input(row);
      flat.insert(flat.end(), z.begin(), z.end());
    }
    inputs.push_back(std::move(flat));
  }
  const auto preds = model.predict_batch(inputs);
  std::vector<evaluate::ForecastRecord> out;
  for (std::size_t i = 0; i < windows.size(); ++i) out.push_back({windows[i].issue_time, preds[i]});
  return out;
}

Comparison compare_solvers(std::span<const features::FeatureSequence> train_data, std::span<const EvalSpill> eval,
                           const CompareConfig& config) {
  if (eval.empty()) throw Error(ErrorCode::EmptyDataset, "no evaluation spills");
  Comparison cmp;
  for (std::size_t k = 0; k < config.cores.size(); ++k) {
    const auto core = config.cores[k];
    auto tc = train::TrainConfig::defaults_for(core);
    if (config.model) tc.model = *config.model;
    tc.model.core = core;
    if (config.max_epochs) tc.max_epochs = *config.max_epochs;
    tc.seed = derive_seed(config.seed, static_cast<std::uint64_t>(core));
    log::info("training " + std::string(model::display_name(core)));
    const auto result = train::train_model(train_data, tc);

    SolverRow row;
    row.core = core;
    row.name = std::string(model::display_name(core));
    row.best_epoch = result.best_epoch;
    row.epochs_run = static_cast<int>(result.history.size()) - 1;
    row.best_val_loss = result.best_val_loss;
    std::vector<double> overlaps, first_areas;
    double tc_sum = 0.0, cv_sum = 0.0;
    for (const auto& spill : eval) {
      const auto windows = train::complete_windows(spill.windows, tc.model.horizons);
      const auto records = forecast(result.model, result.scaling, windows);
      const auto report = evaluate::evaluate_run(records, spill.truth, result.scaling,
                                                 windows.empty() ? features::ScaleClass::Short : windows[0].scale,
                                                 config.cells_per_axis);
      for (const auto& r : report.rows) {
        row.abs_errors.push_back(r.area_abs_err);
        overlaps.push_back(r.overlap);
        row.centroid_disp_km += r.centroid_disp_km;
        if (r.horizon == tc.model.horizons.front()) first_areas.push_back(r.area_pred_km2);
      }
      tc_sum += report.temporal_consistency;
      cv_sum += report.cv_percent;
    }
    const double n = static_cast<double>(row.abs_errors.size());
    double ae = 0.0, ov = 0.0;
    for (double e : row.abs_errors) ae += e;
    for (double o : overlaps) ov += o;
    row.area_mae = ae / n;
    row.centroid_disp_km /= n;
    row.spatial_accuracy = ov / n;
    if (overlaps.size() >= 2) {
      row.spatial_accuracy_ci =
          stats::bootstrap_ci(overlaps, 0.95, config.resamples, derive_seed(config.seed, 100 + k));
    }
    row.temporal_consistency = tc_sum / static_cast<double>(eval.size());
    row.cv_percent = cv_sum / static_cast<double>(eval.size());
    if (!first_areas.empty()) row.area = stats::summary_stats(first_areas);
    cmp.rows.push_back(std::move(row));
  }

  const SolverRow* lstm = nullptr;
  for (const auto& r : cmp.rows)
    if (r.core == model::CoreKind::LstmBaseline) lstm = &r;
  if (lstm) {
    for (const auto& r : cmp.rows) {
      if (&r == lstm) continue;
      PairedTest t{r.name, lstm->name, std::nullopt, std::nullopt};
      try {
        t.t = stats::paired_t_test(r.abs_errors, lstm->abs_errors);
      } catch (const Error& e) {
        log::info(std::string("paired t skipped: ") + e.what());
      }
      try {
        t.wilcoxon = stats::wilcoxon_signed_rank(r.abs_errors, lstm->abs_errors);
      } catch (const Error& e) {
        log::info(std::string("wilcoxon skipped: ") + e.what());
      }
      cmp.tests.push_back(std::move(t));
    }
  }
  return cmp;
}

nlohmann::json Comparison::to_json() const {
  using nlohmann::json;
  json out{{"schema_version", "1.0"}, {"kind", "spillnet-solver-comparison"}};
  json rows_j = json::array();
  for (const auto& r : rows) {
    rows_j.push_back({{"method", r.name},
                      {"core", model::to_string(r.core)},
                      {"best_epoch", r.best_epoch},
                      {"epochs_run", r.epochs_run},
                      {"best_val_loss", r.best_val_loss},
                      {"area", {{"mean", r.area.mean},
                                {"std", r.area.std},
                                {"max", r.area.max},
                                {"min", r.area.min},
                                {"range", r.area.range},
                                {"n", r.area.count}}},
                      {"area_mae_km2", r.area_mae},
                      {"centroid_disp_km", r.centroid_disp_km},
                      {"spatial_accuracy", r.spatial_accuracy},
                      {"spatial_accuracy_ci95", {r.spatial_accuracy_ci.low, r.spatial_accuracy_ci.high}},
                      {"temporal_consistency", r.temporal_consistency},
                      {"cv_percent", r.cv_percent}});
  }
  out["rows"] = rows_j;
  json tests_j = json::array();
  for (const auto& t : tests) {
    json j{{"a", t.a}, {"b", t.b}};
    if (t.t) j["paired_t"] = {{"t", t.t->t}, {"df", t.t->df}, {"p", t.t->p}};
    if (t.wilcoxon) j["wilcoxon"] = {{"w", t.wilcoxon->w}, {"n_eff", t.wilcoxon->n_eff}, {"p", t.wilcoxon->p}};
    tests_j.push_back(j);
  }
  out["paired_tests"] = tests_j;
  return out;
}

std::string Comparison::to_csv() const {
  std::string out =
      "method,area_mean,area_std,area_max,area_min,area_range,n,area_mae_km2,centroid_disp_km,spatial_accuracy,"
      "ci_low,ci_high,temporal_consistency,cv_percent\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.6g,%.6g,%.6g,%.6g,%.6g,%zu,%.6g,%.6g,%.4f,%.4f,%.4f,%.6g,%.4g\n",
                  r.name.c_str(), r.area.mean, r.area.std, r.area.max, r.area.min, r.area.range, r.area.count,
                  r.area_mae, r.centroid_disp_km, r.spatial_accuracy, r.spatial_accuracy_ci.low,
                  r.spatial_accuracy_ci.high, r.temporal_consistency, r.cv_percent);
    out += buf;
  }
  return out;
}

}  // namespace spillnet::compare
