#include "spillnet/features.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "spillnet/error.hpp"
#include "spillnet/geo.hpp"

namespace spillnet::features {
namespace {

using json = nlohmann::json;

constexpr double kTwoPi = 2.0 * geo::kPi;

// Recomputes every component that is a function of time or of other components.
void finalize(FeatureVector& x, UtcSeconds t, UtcSeconds t0) {
  const CalendarParts cal = calendar_parts(t);
  const double hour_angle = kTwoPi * cal.hour_of_day / 24.0;
  const double day_angle = kTwoPi * (cal.day_of_year + cal.hour_of_day / 24.0) / 365.25;
  x[kHoursSinceStart] = static_cast<double>(t - t0) / 3600.0;
  x[kHourSin] = std::sin(hour_angle);
  x[kHourCos] = std::cos(hour_angle);
  x[kDaySin] = std::sin(day_angle);
  x[kDayCos] = std::cos(day_angle);
  x[kWindSpeed] = std::hypot(x[kWindU], x[kWindV]);
  x[kCurrentSpeed] = std::hypot(x[kCurrentU], x[kCurrentV]);
  const double r = std::hypot(x[kOrientationSin], x[kOrientationCos]);
  if (r > 1e-12) {
    x[kOrientationSin] /= r;
    x[kOrientationCos] /= r;
  } else {
    x[kOrientationSin] = 0.0;
    x[kOrientationCos] = 1.0;
  }
}

FeatureVector lerp(const FeatureVector& a, const FeatureVector& b, double w) {
  FeatureVector out;
  for (std::size_t i = 0; i < kFeatureDim; ++i) out[i] = a[i] + w * (b[i] - a[i]);
  return out;
}

void check_increasing(std::span<const TimedFeatures> series) {
  for (std::size_t i = 1; i < series.size(); ++i) {
    if (series[i].time <= series[i - 1].time) {
      throw Error(ErrorCode::InsufficientData, "series timestamps must be strictly increasing");
    }
  }
}

double get_number(const json& o, const std::string& pointer, const char* key, double fallback) {
  auto it = o.find(key);
  if (it == o.end()) return fallback;
  if (!it->is_number()) throw Error(ErrorCode::SchemaError, pointer + "/" + key + ": expected number");
  return it->get<double>();
}

}  // namespace

std::string_view to_string(ScaleClass scale) { return scale == ScaleClass::Short ? "short" : "medium"; }

ScaleClass scale_from_string(std::string_view text) {
  if (text == "short") return ScaleClass::Short;
  if (text == "medium") return ScaleClass::Medium;
  throw Error(ErrorCode::ConfigError, "unknown scale '" + std::string(text) + "'");
}

std::vector<double> Normalizer::normalize(std::span<const double> x) const {
  if (x.size() != mu.size()) throw Error(ErrorCode::ShapeMismatch, "normalizer dimension mismatch");
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = std::clamp((x[i] - mu[i]) / sigma[i], -3.0, 3.0);
  return z;
}

std::vector<double> Normalizer::denormalize(std::span<const double> z) const {
  if (z.size() != mu.size()) throw Error(ErrorCode::ShapeMismatch, "normalizer dimension mismatch");
  std::vector<double> x(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) x[i] = z[i] * sigma[i] + mu[i];
  return x;
}

Normalizer fit_normalizer(std::span<const std::vector<double>> rows) {
  if (rows.empty()) throw Error(ErrorCode::EmptyInput, "cannot fit a normalizer on no data");
  const std::size_t dim = rows[0].size();
  Normalizer n{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
  for (const auto& r : rows) {
    if (r.size() != dim) throw Error(ErrorCode::ShapeMismatch, "ragged normalizer input");
    for (std::size_t i = 0; i < dim; ++i) n.mu[i] += r[i];
  }
  const double count = static_cast<double>(rows.size());
  for (double& m : n.mu) m /= count;
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < dim; ++i) n.sigma[i] += (r[i] - n.mu[i]) * (r[i] - n.mu[i]);
  }
  for (double& s : n.sigma) {
    const double var = s / count;
    s = var < 1e-12 ? 1.0 : std::sqrt(var);
  }
  return n;
}

Normalizer fit_normalizer(std::span<const FeatureVector> train) {
  std::vector<std::vector<double>> rows;
  rows.reserve(train.size());
  for (const auto& x : train) rows.emplace_back(x.begin(), x.end());
  return fit_normalizer(rows);
}

std::vector<double> TargetScaling::normalize_input(const FeatureVector& x) const { return features.normalize(x); }

std::vector<double> TargetScaling::normalize_target(const TargetVector& y) const {
  std::vector<double> z = features.normalize(std::span<const double>(y.data(), kFeatureDim));
  const auto a = aux.normalize(std::span<const double>(y.data() + kFeatureDim, kAuxDim));
  z.insert(z.end(), a.begin(), a.end());
  return z;
}

TargetVector TargetScaling::denormalize_target(std::span<const double> z) const {
  if (z.size() != kTargetDim) throw Error(ErrorCode::ShapeMismatch, "target must have 28 components");
  const auto f = features.denormalize(z.first(kFeatureDim));
  const auto a = aux.denormalize(z.subspan(kFeatureDim));
  TargetVector y;
  std::copy(f.begin(), f.end(), y.begin());
  std::copy(a.begin(), a.end(), y.begin() + kFeatureDim);
  return y;
}

TargetScaling fit_target_scaling(std::span<const FeatureSequence> train) {
  std::vector<FeatureVector> inputs;
  std::vector<std::vector<double>> aux;
  for (const auto& seq : train) {
    inputs.insert(inputs.end(), seq.window.begin(), seq.window.end());
    for (const auto& [h, y] : seq.horizon_targets) aux.emplace_back(y.begin() + kFeatureDim, y.end());
  }
  if (aux.empty()) aux.emplace_back(kAuxDim, 0.0);
  return TargetScaling{fit_normalizer(std::span<const FeatureVector>(inputs)), fit_normalizer(aux)};
}

FeatureVector extract_features(const ingest::SpillObservation& obs, const EnvSample& env, UtcSeconds t0) {
  if (obs.timestamp < t0) throw Error(ErrorCode::AlignmentError, "observation precedes spill start");
  const geo::ShapeDescriptors d = geo::descriptors(obs.boundary);
  const geo::BBox b = obs.boundary.bbox();
  const double mid_lat = 0.5 * (b.min_lat + b.max_lat);
  FeatureVector x{};
  x[kArea] = d.area_km2;
  x[kPerimeter] = d.perimeter_km;
  x[kCompactness] = d.compactness;
  x[kConvexity] = d.convexity;
  x[kAspectRatio] = d.aspect_ratio;
  x[kOrientationSin] = d.orientation_sin2t;
  x[kOrientationCos] = d.orientation_cos2t;
  x[kVertexCount] = static_cast<double>(obs.boundary.exterior().size());
  x[kCentroidLon] = d.centroid.lon;
  x[kCentroidLat] = d.centroid.lat;
  x[kBBoxWidth] = (b.max_lon - b.min_lon) * geo::kDegToRad * geo::kEarthRadiusKm * std::cos(mid_lat * geo::kDegToRad);
  x[kBBoxHeight] = (b.max_lat - b.min_lat) * geo::kDegToRad * geo::kEarthRadiusKm;
  x[kWindU] = env.wind_u;
  x[kWindV] = env.wind_v;
  x[kCurrentU] = env.current_u;
  x[kCurrentV] = env.current_v;
  x[kSst] = env.sst;
  x[kWaveHeight] = env.wave_height;
  finalize(x, obs.timestamp, t0);
  return x;
}

FeatureVector interpolate(std::span<const TimedFeatures> series, UtcSeconds t, UtcSeconds t0) {
  if (series.empty()) throw Error(ErrorCode::InsufficientData, "empty feature series");
  FeatureVector x;
  if (series.size() == 1) {
    x = series[0].x;
  } else {
    // Segment containing t; the first/last segment is extended outside the span.
    auto it = std::upper_bound(series.begin(), series.end(), t,
                               [](UtcSeconds v, const TimedFeatures& s) { return v < s.time; });
    std::size_t hi = static_cast<std::size_t>(it - series.begin());
    hi = std::clamp<std::size_t>(hi, 1, series.size() - 1);
    const TimedFeatures& a = series[hi - 1];
    const TimedFeatures& b = series[hi];
    const double w = static_cast<double>(t - a.time) / static_cast<double>(b.time - a.time);
    x = lerp(a.x, b.x, w);
  }
  finalize(x, t, t0);
  return x;
}

std::array<double, kAuxDim> aux_rates(std::span<const TimedFeatures> series, UtcSeconds t, UtcSeconds t0,
                                      double dt_s) {
  const UtcSeconds step = static_cast<UtcSeconds>(dt_s);
  const UtcSeconds lo = std::max(t - step, series.front().time);
  const UtcSeconds hi = std::min(t + step, series.back().time);
  if (hi <= lo) return {0.0, 0.0, 0.0};
  const FeatureVector a = interpolate(series, lo, t0);
  const FeatureVector b = interpolate(series, hi, t0);
  const double hours = static_cast<double>(hi - lo) / 3600.0;
  const double mid_lat = 0.5 * (a[kCentroidLat] + b[kCentroidLat]) * geo::kDegToRad;
  const double km_per_deg = geo::kEarthRadiusKm * geo::kDegToRad;
  return {(b[kArea] - a[kArea]) / hours,
          (b[kCentroidLon] - a[kCentroidLon]) * km_per_deg * std::cos(mid_lat) / hours,
          (b[kCentroidLat] - a[kCentroidLat]) * km_per_deg / hours};
}

std::vector<FeatureSequence> build_sequences(std::span<const TimedFeatures> series, ScaleClass scale,
                                             const std::string& spill_id) {
  check_increasing(series);
  if (series.empty()) throw Error(ErrorCode::InsufficientData, "empty feature series");
  const UtcSeconds t0 = series.front().time;
  const UtcSeconds t_end = series.back().time;
  const UtcSeconds step = scale == ScaleClass::Short ? 3600 : 86400;

  std::vector<UtcSeconds> grid_times;
  if (scale == ScaleClass::Short) {
    const UtcSeconds last = std::min<UtcSeconds>(t0 + static_cast<UtcSeconds>(kShortHorizonSpanH * 3600), t_end);
    for (UtcSeconds t = t0; t <= last; t += step) grid_times.push_back(t);
  } else {
    for (int d = 1; d <= 7 && t0 + d * step <= t_end; ++d) grid_times.push_back(t0 + d * step);
  }
  if (grid_times.size() < 2) {
    throw Error(ErrorCode::InsufficientData,
                "need at least 2 grid points, got " + std::to_string(grid_times.size()));
  }

  std::vector<TimedFeatures> grid;
  grid.reserve(std::max(grid_times.size(), kWindowLength));
  for (UtcSeconds t : grid_times) grid.push_back({t, interpolate(series, t, t0)});
  if (grid.size() < kWindowLength) {
    const std::size_t pad = kWindowLength - grid.size();
    const FeatureVector g0 = grid[0].x;
    const FeatureVector g1 = grid[1].x;
    std::vector<TimedFeatures> padded;
    padded.reserve(kWindowLength);
    for (std::size_t j = pad; j >= 1; --j) {
      const double k = static_cast<double>(j);
      FeatureVector x;
      for (std::size_t i = 0; i < kFeatureDim; ++i) x[i] = g0[i] - k * (g1[i] - g0[i]);
      const UtcSeconds t = grid[0].time - static_cast<UtcSeconds>(j) * step;
      finalize(x, t, t0);
      padded.push_back({t, x});
    }
    padded.insert(padded.end(), grid.begin(), grid.end());
    grid = std::move(padded);
  }

  std::vector<FeatureSequence> out;
  for (std::size_t end = kWindowLength - 1; end < grid.size(); ++end) {
    FeatureSequence seq;
    seq.scale = scale;
    seq.spill_id = spill_id;
    seq.issue_time = grid[end].time;
    for (std::size_t k = 0; k < kWindowLength; ++k) seq.window[k] = grid[end + 1 - kWindowLength + k].x;
    for (int h : kHorizons) {
      const UtcSeconds t = seq.issue_time + h * step;
      if (t > t_end) continue;
      const FeatureVector f = interpolate(series, t, t0);
      const auto aux = aux_rates(series, t, t0, static_cast<double>(step));
      TargetVector y;
      std::copy(f.begin(), f.end(), y.begin());
      std::copy(aux.begin(), aux.end(), y.begin() + kFeatureDim);
      seq.horizon_targets.emplace(h, y);
    }
    out.push_back(std::move(seq));
  }
  return out;
}

EnvSample env_at(std::span<const EnvSample> env, UtcSeconds t) {
  if (env.empty()) return EnvSample{0.0, 0.0, 0.0, 0.0, 20.0, 0.0, t};
  const EnvSample* best = &env[0];
  for (const EnvSample& e : env) {
    if (std::llabs(e.valid_time - t) < std::llabs(best->valid_time - t)) best = &e;
  }
  return *best;
}

std::vector<TimedFeatures> feature_series(std::span<const ingest::SpillObservation> observations,
                                          std::span<const EnvSample> env) {
  if (observations.empty()) throw Error(ErrorCode::InsufficientData, "no observations");
  const UtcSeconds t0 = observations.front().timestamp;
  std::vector<TimedFeatures> out;
  out.reserve(observations.size());
  for (const auto& obs : observations) {
    out.push_back({obs.timestamp, extract_features(obs, env_at(env, obs.timestamp), t0)});
  }
  return out;
}

std::vector<EnvSample> parse_env_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, std::string("/: invalid JSON: ") + e.what());
  }
  if (doc.is_object() && doc.contains("samples")) doc = doc["samples"];
  if (!doc.is_array()) throw Error(ErrorCode::SchemaError, "/: expected array of environment samples");
  std::vector<EnvSample> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string p = "/" + std::to_string(i);
    const json& o = doc[i];
    if (!o.is_object() || !o.contains("valid_time") || !o["valid_time"].is_string()) {
      throw Error(ErrorCode::SchemaError, p + "/valid_time: missing ISO-8601 string");
    }
    EnvSample e;
    e.valid_time = parse_iso8601(o["valid_time"].get<std::string>());
    e.wind_u = get_number(o, p, "wind_u", 0.0);
    e.wind_v = get_number(o, p, "wind_v", 0.0);
    e.current_u = get_number(o, p, "current_u", 0.0);
    e.current_v = get_number(o, p, "current_v", 0.0);
    e.sst = get_number(o, p, "sst", 20.0);
    e.wave_height = get_number(o, p, "wave_height", 0.0);
    if (e.wave_height < 0.0) throw Error(ErrorCode::SchemaError, p + "/wave_height: must be >= 0");
    out.push_back(e);
  }
  std::sort(out.begin(), out.end(), [](const EnvSample& a, const EnvSample& b) { return a.valid_time < b.valid_time; });
  return out;
}

std::string write_env_json(std::span<const EnvSample> env) {
  json arr = json::array();
  for (const auto& e : env) {
    arr.push_back({{"valid_time", format_iso8601(e.valid_time)},
                   {"wind_u", e.wind_u},
                   {"wind_v", e.wind_v},
                   {"current_u", e.current_u},
                   {"current_v", e.current_v},
                   {"sst", e.sst},
                   {"wave_height", e.wave_height}});
  }
  return arr.dump(2);
}

}  // namespace spillnet::features
