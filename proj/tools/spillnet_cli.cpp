#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spillnet/checkpoint.hpp"
#include "spillnet/compare.hpp"
#include "spillnet/dataset.hpp"
#include "spillnet/error.hpp"
#include "spillnet/evaluate.hpp"
#include "spillnet/features.hpp"
#include "spillnet/ingest.hpp"
#include "spillnet/jsonutil.hpp"
#include "spillnet/log.hpp"
#include "spillnet/scenario.hpp"
#include "spillnet/sim.hpp"
#include "spillnet/stats.hpp"
#include "spillnet/tcp_ingress.hpp"
#include "spillnet/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace spillnet;

namespace {

constexpr const char* kArtifactVersion = "spillnet 1.0.0";

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string solver = "rk4";
  std::string out = "out";
};

struct RunRecord {
  std::string command;
  json config = json::object();
  json inputs = json::object();
  json outputs = json::object();
  std::uint64_t seed = 0;
};

std::string read(const std::string& path) { return ingest::read_text_file(path); }

void write(const fs::path& path, std::string_view text) { ingest::write_text_file(path, text); }

fs::path out_dir(const Common& c) {
  fs::create_directories(c.out);
  return fs::path(c.out);
}

void write_manifest(const Common& c, const RunRecord& r, double wall_s) {
  json m{{"schema_version", jsonutil::kSchemaVersion},
         {"command", r.command},
         {"config", r.config},
         {"inputs", r.inputs},
         {"outputs", r.outputs},
         {"seed", r.seed},
         {"artifact_version", kArtifactVersion},
         {"wall_clock_s", wall_s}};
  write(out_dir(c) / "manifest.json", m.dump(2) + "\n");
}

std::vector<features::EnvSample> load_env(const std::string& path) {
  if (path.empty()) return {};
  return features::parse_env_json(read(path));
}

features::ScaleClass scale_of(const std::string& s) { return features::scale_from_string(s); }

json horizon_json(const model::HorizonPrediction& h, const features::TargetScaling& scaling) {
  const auto raw = evaluate::denormalized(h, scaling);
  return {{"horizon", h.horizon},
          {"mean_normalized", h.mean},
          {"uncertainty", h.uncertainty},
          {"raw", std::vector<double>(raw.begin(), raw.end())},
          {"area_km2", raw[features::kArea]},
          {"centroid", {raw[features::kCentroidLon], raw[features::kCentroidLat]}}};
}

json polygon_geometry(const geo::GeoPolygon& p) {
  json ring = json::array();
  for (const auto& v : p.exterior()) ring.push_back({v.lon, v.lat});
  ring.push_back({p.exterior().front().lon, p.exterior().front().lat});
  return {{"type", "Polygon"}, {"coordinates", json::array({ring})}};
}

// ---- subcommands ----

RunRecord cmd_scenario(const Common& c, int kind, int duration_h, int step_h) {
  RunRecord r{"scenario"};
  scenario::ScenarioConfig sc;
  if (!c.config.empty()) sc = scenario::scenario_config_from_json(read(c.config));
  if (kind) sc.kind = kind;
  if (duration_h) sc.duration_h = duration_h;
  if (step_h) sc.step_h = step_h;
  if (c.seed) sc.seed = *c.seed;
  const auto frames = scenario::generate_scenario(sc);
  const auto obs = scenario::observations_of(frames);
  const auto env = scenario::env_of(frames);
  const auto dir = out_dir(c);
  write(dir / "spill.json", ingest::write_spill_json(sc.params.spill_id, obs));
  write(dir / "env.json", features::write_env_json(env));
  r.config = {{"kind", sc.kind}, {"seed", sc.seed}, {"duration_h", sc.duration_h}, {"step_h", sc.step_h}};
  r.outputs = {{"spill", (dir / "spill.json").string()}, {"env", (dir / "env.json").string()}};
  r.seed = sc.seed;
  return r;
}

RunRecord cmd_ingest(const Common& c, const std::string& input, const std::string& manifest, std::string spill_id,
                     const std::string& timestamp) {
  RunRecord r{"ingest"};
  std::vector<ingest::SpillObservation> obs;
  if (!manifest.empty()) {
    obs = ingest::load_shapefile_series(manifest, spill_id);
    r.inputs["manifest"] = manifest;
  } else if (input.empty()) {
    throw Error(ErrorCode::ConfigError, "ingest needs --input or --manifest");
  } else if (fs::path(input).extension() == ".shp") {
    if (timestamp.empty()) throw Error(ErrorCode::ConfigError, "a single shapefile needs --timestamp");
    const auto bytes = ingest::read_file_bytes(input);
    std::vector<geo::GeoPolygon> parts;
    for (const auto& rec : ingest::parse_shapefile(bytes)) {
      if (rec.shape_type == ingest::kShapeNull) continue;
      for (auto& p : ingest::record_polygons(rec)) parts.push_back(std::move(p));
    }
    obs.push_back({parse_iso8601(timestamp), geo::largest_component(parts), fs::path(input).filename().string(),
                   spill_id});
    r.inputs["shapefile"] = input;
  } else {
    obs = ingest::parse_spill_json(read(input));
    if (spill_id == "spill" && !obs.empty() && !obs.front().spill_id.empty()) spill_id = obs.front().spill_id;
    r.inputs["spill"] = input;
  }
  const auto dir = out_dir(c);
  write(dir / "spill.json", ingest::write_spill_json(spill_id, obs));
  r.config = {{"spill_id", spill_id}, {"observations", obs.size()}};
  r.outputs = {{"spill", (dir / "spill.json").string()}};
  return r;
}

RunRecord cmd_features(const Common& c, const std::string& spill, const std::string& env_path,
                       const std::string& scale) {
  RunRecord r{"features"};
  const auto obs = ingest::parse_spill_json(read(spill));
  const auto env = load_env(env_path);
  const auto series = features::feature_series(obs, env);
  const std::string id = obs.empty() ? "spill" : obs.front().spill_id;
  const auto seqs = features::build_sequences(series, scale_of(scale), id);
  const auto dir = out_dir(c);
  dataset::save(dir / "dataset.json", seqs);
  r.config = {{"scale", scale}, {"windows", seqs.size()}};
  r.inputs = {{"spill", spill}, {"env", env_path}};
  r.outputs = {{"dataset", (dir / "dataset.json").string()}};
  return r;
}

RunRecord cmd_train(const Common& c, const std::string& dataset_path, std::optional<int> epochs) {
  RunRecord r{"train"};
  const auto solver = model::core_from_string(c.solver);
  auto tc = train::TrainConfig::defaults_for(solver);
  if (!c.config.empty()) tc = train::train_config_from_json(read(c.config), tc);
  tc.solver = solver;
  tc.model.core = solver;
  if (c.seed) tc.seed = *c.seed;
  if (epochs) tc.max_epochs = *epochs;
  tc.validate();
  const auto data = dataset::load(dataset_path);
  const auto result = train::train_model(data, tc);
  const auto dir = out_dir(c);
  const auto scale = data.empty() ? features::ScaleClass::Short : data.front().scale;
  checkpoint::save(dir / "checkpoint.json", result.model, result.scaling, scale);
  write(dir / "history.csv", train::history_csv(result.history));
  r.config = json::parse(train::train_config_to_json(tc));
  r.inputs = {{"dataset", dataset_path}};
  r.outputs = {{"checkpoint", (dir / "checkpoint.json").string()},
               {"history", (dir / "history.csv").string()},
               {"best_epoch", result.best_epoch},
               {"best_val_loss", result.best_val_loss},
               {"stopped_early", result.stopped_early}};
  r.seed = tc.seed;
  return r;
}

RunRecord cmd_predict(const Common& c, const std::string& ckpt_path, const std::string& spill,
                      const std::string& env_path) {
  RunRecord r{"predict"};
  const auto ckpt = checkpoint::load(ckpt_path);
  const auto obs = ingest::parse_spill_json(read(spill));
  const auto series = features::feature_series(obs, load_env(env_path));
  const auto seqs = features::build_sequences(series, ckpt.scale, obs.empty() ? "spill" : obs.front().spill_id);
  const auto records = compare::forecast(ckpt.model, ckpt.scaling, seqs);
  json forecasts = json::array();
  json features_j = json::array();
  for (const auto& rec : records) {
    json hs = json::array();
    for (const auto& h : rec.prediction.horizons) {
      hs.push_back(horizon_json(h, ckpt.scaling));
      const auto boundary = evaluate::reconstruct_boundary(evaluate::denormalized(h, ckpt.scaling));
      features_j.push_back({{"type", "Feature"},
                            {"geometry", polygon_geometry(boundary)},
                            {"properties", {{"issue_time_utc", format_iso8601(rec.issue_time)}, {"horizon", h.horizon}}}});
    }
    forecasts.push_back({{"issue_time_utc", format_iso8601(rec.issue_time)}, {"horizons", hs}});
  }
  json doc{{"schema_version", jsonutil::kSchemaVersion},
           {"kind", "spillnet-predictions"},
           {"scale", features::to_string(ckpt.scale)},
           {"normalizers", checkpoint::scaling_to_json(ckpt.scaling)},
           {"forecasts", forecasts}};
  const auto dir = out_dir(c);
  write(dir / "predictions.json", doc.dump(1) + "\n");
  write(dir / "predictions.geojson", json{{"type", "FeatureCollection"}, {"features", features_j}}.dump() + "\n");
  r.inputs = {{"checkpoint", ckpt_path}, {"spill", spill}, {"env", env_path}};
  r.outputs = {{"predictions", (dir / "predictions.json").string()},
               {"geojson", (dir / "predictions.geojson").string()},
               {"forecasts", records.size()}};
  return r;
}

struct LoadedPredictions {
  std::vector<evaluate::ForecastRecord> records;
  features::TargetScaling scaling;
  features::ScaleClass scale = features::ScaleClass::Short;
};

LoadedPredictions load_predictions(const std::string& path) {
  const auto doc = jsonutil::parse(read(path));
  jsonutil::check_schema_version(doc, true);
  LoadedPredictions out;
  out.scale = scale_of(jsonutil::get_as<std::string>(doc, "", "scale"));
  out.scaling = checkpoint::scaling_from_json(jsonutil::require(doc, "", "normalizers"));
  const auto& fs_j = jsonutil::require(doc, "", "forecasts");
  if (!fs_j.is_array()) jsonutil::schema_error("/forecasts", "expected array");
  for (std::size_t i = 0; i < fs_j.size(); ++i) {
    const std::string p = "/forecasts/" + std::to_string(i);
    evaluate::ForecastRecord rec;
    rec.issue_time = parse_iso8601(jsonutil::get_as<std::string>(fs_j[i], p, "issue_time_utc"));
    const auto& hs = jsonutil::require(fs_j[i], p, "horizons");
    for (std::size_t k = 0; k < hs.size(); ++k) {
      const std::string q = p + "/horizons/" + std::to_string(k);
      rec.prediction.horizons.push_back({jsonutil::get_as<int>(hs[k], q, "horizon"),
                                         jsonutil::get_as<std::vector<double>>(hs[k], q, "mean_normalized"),
                                         jsonutil::get_as<std::vector<double>>(hs[k], q, "uncertainty")});
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

json interval_json(const stats::Interval& i) { return json::array({i.low, i.high}); }

RunRecord cmd_evaluate(const Common& c, const std::string& predictions, const std::string& truth,
                       const std::string& baseline) {
  RunRecord r{"evaluate"};
  const std::uint64_t seed = c.seed.value_or(0);
  const auto pred = load_predictions(predictions);
  const auto obs = ingest::parse_spill_json(read(truth));
  const auto report = evaluate::evaluate_run(pred.records, obs, pred.scaling, pred.scale);
  std::vector<double> errors, overlaps;
  for (const auto& row : report.rows) {
    errors.push_back(row.area_abs_err);
    overlaps.push_back(row.overlap);
  }
  json summary{{"schema_version", jsonutil::kSchemaVersion},
               {"rows", report.rows.size()},
               {"area_mae_km2", report.area_mae},
               {"centroid_disp_km", report.centroid_disp_km},
               {"spatial_accuracy", report.overlap_ratio},
               {"temporal_consistency", report.temporal_consistency},
               {"cv_percent", report.cv_percent},
               {"drift_velocity_kmph", report.drift_velocity}};
  if (errors.size() >= 2) {
    summary["area_mae_ci95"] = interval_json(stats::bootstrap_ci(errors, 0.95, 10000, derive_seed(seed, 1)));
    summary["spatial_accuracy_ci95"] = interval_json(stats::bootstrap_ci(overlaps, 0.95, 10000, derive_seed(seed, 2)));
  }
  if (!baseline.empty()) {
    const auto base = load_predictions(baseline);
    const auto other = evaluate::evaluate_run(base.records, obs, base.scaling, base.scale);
    if (other.rows.size() != report.rows.size()) {
      throw Error(ErrorCode::LengthMismatch, "baseline scores " + std::to_string(other.rows.size()) + " rows, not " +
                                                 std::to_string(report.rows.size()));
    }
    std::vector<double> base_errors;
    for (const auto& row : other.rows) base_errors.push_back(row.area_abs_err);
    json tests = json::object();
    try {
      const auto t = stats::paired_t_test(errors, base_errors);
      tests["paired_t"] = {{"t", t.t}, {"df", t.df}, {"p", t.p}};
    } catch (const Error& e) {
      tests["paired_t"] = {{"error", e.what()}};
    }
    try {
      const auto w = stats::wilcoxon_signed_rank(errors, base_errors);
      tests["wilcoxon"] = {{"w", w.w}, {"n_eff", w.n_eff}, {"p", w.p}, {"exact", w.exact}};
    } catch (const Error& e) {
      tests["wilcoxon"] = {{"error", e.what()}};
    }
    summary["baseline_area_mae_km2"] = other.area_mae;
    summary["paired_tests"] = tests;
    r.inputs["baseline"] = baseline;
  }
  const auto dir = out_dir(c);
  write(dir / "metrics.csv", evaluate::report_csv(report));
  write(dir / "metrics.json", summary.dump(2) + "\n");
  r.inputs["predictions"] = predictions;
  r.inputs["truth"] = truth;
  r.outputs = {{"csv", (dir / "metrics.csv").string()}, {"json", (dir / "metrics.json").string()}};
  r.seed = seed;
  return r;
}

RunRecord cmd_compare(const Common& c, const std::string& dataset_path, const std::vector<std::string>& eval_spills,
                      const std::string& eval_env, int scenario_kind, int windows, std::optional<int> epochs,
                      int eval_replicas) {
  RunRecord r{"compare-solvers"};
  const std::uint64_t seed = c.seed.value_or(0);
  compare::CompareConfig cc;
  cc.seed = seed;
  cc.max_epochs = epochs;
  std::vector<features::FeatureSequence> data;
  if (!dataset_path.empty()) {
    data = dataset::load(dataset_path);
    r.inputs["dataset"] = dataset_path;
  } else {
    data = dataset::synthetic_windows(scenario_kind, seed, static_cast<std::size_t>(windows));
  }
  std::vector<compare::EvalSpill> eval;
  for (const auto& path : eval_spills) {
    compare::EvalSpill e;
    e.truth = ingest::parse_spill_json(read(path));
    const auto series = features::feature_series(e.truth, load_env(eval_env));
    e.windows = features::build_sequences(series, data.empty() ? features::ScaleClass::Short : data.front().scale,
                                          e.truth.empty() ? "eval" : e.truth.front().spill_id);
    eval.push_back(std::move(e));
  }
  if (eval.empty()) {
    for (int i = 0; i < eval_replicas; ++i)
      eval.push_back(compare::scenario_spill(scenario_kind, derive_seed(seed, 999 - static_cast<std::uint64_t>(i))));
  }
  const auto cmp = compare::compare_solvers(data, eval, cc);
  const auto dir = out_dir(c);
  write(dir / "comparison.json", cmp.to_json().dump(2) + "\n");
  write(dir / "comparison.csv", cmp.to_csv());
  r.config = {{"scenario_kind", scenario_kind},
              {"windows", data.size()},
              {"eval_spills", eval.size()},
              {"max_epochs", epochs ? json(*epochs) : json(nullptr)}};
  r.inputs["eval_spills"] = eval_spills;
  r.outputs = {{"json", (dir / "comparison.json").string()}, {"csv", (dir / "comparison.csv").string()}};
  r.seed = seed;
  return r;
}

RunRecord cmd_simulate(const Common& c, int fleet, double duration_h, const std::string& ckpt_path,
                       std::optional<int> tcp_port, int tick_delay_ms, const std::string& updates_path) {
  RunRecord r{"simulate"};
  sim::SimConfig sc;
  if (!c.config.empty()) sc = sim::sim_config_from_json(read(c.config));
  if (c.seed) sc.seed = *c.seed;
  if (fleet) sc.fleet_size = fleet;
  if (duration_h > 0) sc.duration_h = duration_h;
  sc.validate();

  sim::SimHooks hooks;
  if (!ckpt_path.empty()) {
    if (sc.boundary_km) throw Error(ErrorCode::ConfigError, "--checkpoint needs a scenario boundary, not boundary_km");
    scenario::ScenarioConfig scfg;
    scfg.kind = sc.scenario_kind;
    scfg.seed = sc.scenario_seed;
    scfg.duration_h = std::max(48, static_cast<int>(std::ceil(sc.duration_h)) + 1);
    hooks.predictor = sim::checkpoint_predictor(checkpoint::load(ckpt_path), scenario::generate_scenario(scfg));
    r.inputs["checkpoint"] = ckpt_path;
  }
  std::unique_ptr<sim::TcpIngress> ingress;
  std::vector<sim::BoundaryUpdate> replay;
  if (!updates_path.empty()) {
    replay = sim::read_boundary_updates(updates_path);
    r.inputs["updates"] = updates_path;
  }
  if (tcp_port) {
    ingress = std::make_unique<sim::TcpIngress>(static_cast<std::uint16_t>(*tcp_port));
    std::cerr << json{{"listening", ingress->port()}}.dump() << std::endl;
  }
  if (ingress || !replay.empty()) {
    hooks.ingress = [&, first = true]() mutable {
      std::vector<sim::BoundaryUpdate> out;
      if (first) {
        out = std::move(replay);
        first = false;
      }
      if (ingress) {
        if (tick_delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(tick_delay_ms));
        auto more = ingress->poll();
        out.insert(out.end(), more.begin(), more.end());
      }
      return out;
    };
  }
  const auto result = sim::run_simulation(sc, hooks);
  if (ingress) ingress->stop();
  const auto dir = out_dir(c);
  write(dir / "events.jsonl", result.log.jsonl());
  write(dir / "metrics.json", result.metrics.to_json().dump(2) + "\n");
  write(dir / "trajectories.geojson", result.trajectory_geojson());
  r.config = sim::sim_config_to_json(sc);
  r.outputs = {{"events", (dir / "events.jsonl").string()},
               {"metrics", (dir / "metrics.json").string()},
               {"trajectories", (dir / "trajectories.geojson").string()},
               {"events_logged", result.log.records().size()}};
  if (ingress) r.outputs["tcp_rejected"] = ingress->rejected();
  r.seed = sc.seed;
  return r;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NumericalError:
    case ErrorCode::NotScalarLoss:
      return 3;
    default:
      return 2;
  }
}

void report_error(int code, std::string_view kind, std::string_view message) {
  std::cerr << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Oil spill boundary forecasting and vehicle coordination"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "JSON config file (flags override it)");
    sub->add_option("--seed", common.seed, "Master seed");
    sub->add_option("--solver", common.solver, "rk4 | explicit | euler | lstm")
        ->check(CLI::IsMember({"rk4", "explicit", "euler", "lstm"}));
    sub->add_option("--out", common.out, "Output directory");
  };

  int kind = 0, duration = 0, step = 0;
  auto* sc = app.add_subcommand("scenario", "Synthetic ground-truth spill and environment");
  add_common(sc);
  sc->add_option("--kind", kind, "Scenario kind 1-5");
  sc->add_option("--duration-h", duration, "Hours to generate");
  sc->add_option("--step-h", step, "Hours between frames");

  std::string input, manifest, spill_id = "spill", timestamp;
  auto* ing = app.add_subcommand("ingest", "Shapefile or spill JSON to canonical spill JSON");
  add_common(ing);
  ing->add_option("--input", input, ".shp or spill .json");
  ing->add_option("--manifest", manifest, "JSON manifest of shapefiles and timestamps");
  ing->add_option("--spill-id", spill_id);
  ing->add_option("--timestamp", timestamp, "ISO-8601 time of a single shapefile");

  std::string spill, env, scale = "short";
  auto* fe = app.add_subcommand("features", "Spill JSON and environment to a window dataset");
  add_common(fe);
  fe->add_option("--spill", spill)->required();
  fe->add_option("--env", env);
  fe->add_option("--scale", scale)->check(CLI::IsMember({"short", "medium"}));

  std::string dataset_path;
  std::optional<int> epochs;
  auto* tr = app.add_subcommand("train", "Train one core on a dataset");
  add_common(tr);
  tr->add_option("--dataset", dataset_path)->required();
  tr->add_option("--epochs", epochs, "Maximum epochs");

  std::string ckpt;
  auto* pr = app.add_subcommand("predict", "Forecast every window of a spill");
  add_common(pr);
  pr->add_option("--checkpoint", ckpt)->required();
  pr->add_option("--spill", spill)->required();
  pr->add_option("--env", env);

  std::string predictions, truth, baseline;
  auto* ev = app.add_subcommand("evaluate", "Score predictions against observed boundaries");
  add_common(ev);
  ev->add_option("--predictions", predictions)->required();
  ev->add_option("--truth", truth)->required();
  ev->add_option("--baseline", baseline, "Second predictions file for paired tests");

  std::vector<std::string> eval_spills;
  int windows = 200, eval_replicas = 2;
  int scenario_kind = 3;
  auto* cs = app.add_subcommand("compare-solvers", "Train and score all four cores on one dataset");
  add_common(cs);
  cs->add_option("--dataset", dataset_path, "Training dataset (default: synthetic scenario windows)");
  cs->add_option("--eval-spill", eval_spills, "Held-out spill JSON (repeatable)");
  cs->add_option("--eval-env", env);
  cs->add_option("--scenario-kind", scenario_kind, "Synthetic scenario used when no files are given");
  cs->add_option("--windows", windows, "Synthetic training windows");
  cs->add_option("--eval-replicas", eval_replicas, "Synthetic held-out replicas");
  cs->add_option("--epochs", epochs, "Shared epoch budget");

  int fleet = 0, tick_delay_ms = 0;
  double sim_hours = 0;
  std::optional<int> tcp_port;
  std::string updates;
  auto* si = app.add_subcommand("simulate", "Multi-vehicle containment simulation");
  add_common(si);
  si->add_option("--fleet-size", fleet);
  si->add_option("--duration-h", sim_hours);
  si->add_option("--checkpoint", ckpt, "Forecast boundaries with a trained model");
  si->add_option("--tcp-listen", tcp_port, "Accept BOUNDARY_UPDATE lines on 127.0.0.1:PORT (0 = any)");
  si->add_option("--tick-delay-ms", tick_delay_ms, "Wall-clock pause per tick while listening");
  si->add_option("--updates", updates, "Newline-delimited BOUNDARY_UPDATE file to apply at start");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error(1, "UsageError", e.what());
    std::cerr << app.help() << std::endl;
    return 1;
  }

  const auto t0 = std::chrono::steady_clock::now();
  try {
    RunRecord r;
    if (*sc) r = cmd_scenario(common, kind, duration, step);
    else if (*ing) r = cmd_ingest(common, input, manifest, spill_id, timestamp);
    else if (*fe) r = cmd_features(common, spill, env, scale);
    else if (*tr) r = cmd_train(common, dataset_path, epochs);
    else if (*pr) r = cmd_predict(common, ckpt, spill, env);
    else if (*ev) r = cmd_evaluate(common, predictions, truth, baseline);
    else if (*cs) r = cmd_compare(common, dataset_path, eval_spills, env, scenario_kind, windows, epochs, eval_replicas);
    else if (*si) r = cmd_simulate(common, fleet, sim_hours, ckpt, tcp_port, tick_delay_ms, updates);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(common, r, wall);
    log::info(r.command + " done in " + std::to_string(wall) + " s");
    return 0;
  } catch (const Error& e) {
    const int code = exit_code_for(e.code());
    report_error(code, to_string(e.code()), e.what());
    return code;
  } catch (const std::exception& e) {
    report_error(2, "IoError", e.what());
    return 2;
  }
}
