#include "spillnet/dataset.hpp"

#include "spillnet/error.hpp"
#include "spillnet/ingest.hpp"
#include "spillnet/jsonutil.hpp"
#include "spillnet/rng.hpp"
#include "spillnet/scenario.hpp"

namespace spillnet::dataset {

using jsonutil::json;

namespace {

template <std::size_t N>
std::array<double, N> fixed_array(const json& j, const std::string& pointer) {
  if (!j.is_array() || j.size() != N) jsonutil::schema_error(pointer, "expected " + std::to_string(N) + " numbers");
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!j[i].is_number()) jsonutil::schema_error(pointer + "/" + std::to_string(i), "expected number");
    out[i] = j[i].get<double>();
  }
  return out;
}

}  // namespace

std::string to_json(std::span<const features::FeatureSequence> sequences) {
  json seqs = json::array();
  for (const auto& s : sequences) {
    json window = json::array();
    for (const auto& row : s.window) window.push_back(row);
    json targets = json::object();
    for (const auto& [h, y] : s.horizon_targets) targets[std::to_string(h)] = y;
    seqs.push_back({{"spill_id", s.spill_id},
                    {"issue_time_utc", format_iso8601(s.issue_time)},
                    {"scale", std::string(features::to_string(s.scale))},
                    {"window", window},
                    {"targets", targets}});
  }
  json doc = {{"schema_version", jsonutil::kSchemaVersion}, {"kind", "spillnet-dataset"}, {"sequences", seqs}};
  return doc.dump(1);
}

std::vector<features::FeatureSequence> from_json(std::string_view text) {
  const json doc = jsonutil::parse(text);
  jsonutil::check_schema_version(doc, true);
  if (jsonutil::get_as<std::string>(doc, "", "kind") != "spillnet-dataset") {
    jsonutil::schema_error("/kind", "expected spillnet-dataset");
  }
  const json& seqs = jsonutil::require(doc, "", "sequences");
  if (!seqs.is_array()) jsonutil::schema_error("/sequences", "expected array");
  std::vector<features::FeatureSequence> out;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const std::string p = "/sequences/" + std::to_string(i);
    const json& s = seqs[i];
    features::FeatureSequence seq;
    seq.spill_id = jsonutil::get_or<std::string>(s, p, "spill_id", "");
    seq.issue_time = parse_iso8601(jsonutil::get_as<std::string>(s, p, "issue_time_utc"));
    seq.scale = features::scale_from_string(jsonutil::get_as<std::string>(s, p, "scale"));
    const json& w = jsonutil::require(s, p, "window");
    if (!w.is_array() || w.size() != features::kWindowLength) {
      jsonutil::schema_error(p + "/window", "expected " + std::to_string(features::kWindowLength) + " rows");
    }
    for (std::size_t t = 0; t < features::kWindowLength; ++t) {
      seq.window[t] = fixed_array<features::kFeatureDim>(w[t], p + "/window/" + std::to_string(t));
    }
    const json& tg = jsonutil::require(s, p, "targets");
    if (!tg.is_object()) jsonutil::schema_error(p + "/targets", "expected object");
    for (const auto& [key, value] : tg.items()) {
      int h = 0;
      try {
        h = std::stoi(key);
      } catch (const std::exception&) {
        jsonutil::schema_error(p + "/targets/" + key, "horizon key must be an integer");
      }
      seq.horizon_targets[h] = fixed_array<features::kTargetDim>(value, p + "/targets/" + key);
    }
    out.push_back(std::move(seq));
  }
  return out;
}

void save(const std::filesystem::path& path, std::span<const features::FeatureSequence> sequences) {
  ingest::write_text_file(path, to_json(sequences));
}

std::vector<features::FeatureSequence> load(const std::filesystem::path& path) {
  return from_json(ingest::read_text_file(path));
}

std::vector<features::FeatureSequence> synthetic_windows(int kind, std::uint64_t seed, std::size_t windows,
                                                         int duration_h) {
  std::vector<features::FeatureSequence> out;
  const std::vector<int> horizons(features::kHorizons.begin(), features::kHorizons.end());
  for (std::uint64_t i = 0; out.size() < windows; ++i) {
    if (i > 10000) throw Error(ErrorCode::InsufficientData, "scenario yields no complete windows");
    scenario::ScenarioConfig sc;
    sc.kind = kind;
    sc.seed = derive_seed(seed, i);
    sc.duration_h = duration_h;
    sc.params.spill_id = std::to_string(kind) + "-" + std::to_string(i);
    const auto frames = scenario::generate_scenario(sc);
    const auto obs = scenario::observations_of(frames);
    const auto env = scenario::env_of(frames);
    const auto series = features::feature_series(obs, env);
    for (auto& s : features::build_sequences(series, features::ScaleClass::Short, sc.params.spill_id)) {
      bool complete = true;
      for (int h : horizons) complete = complete && s.horizon_targets.contains(h);
      if (complete && out.size() < windows) out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace spillnet::dataset
