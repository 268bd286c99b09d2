#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spillnet/ingest.hpp"
#include "spillnet/timeutil.hpp"

namespace spillnet::features {

inline constexpr std::size_t kFeatureDim = 25;
inline constexpr std::size_t kTargetDim = 28;
inline constexpr std::size_t kAuxDim = kTargetDim - kFeatureDim;
inline constexpr std::size_t kWindowLength = 16;
inline constexpr double kShortHorizonSpanH = 48.0;
inline constexpr double kWindage = 0.03;

/// Fixed index map of the per-timestep feature vector.
enum Feature : std::size_t {
  kArea = 0,
  kPerimeter,
  kCompactness,
  kConvexity,
  kAspectRatio,
  kOrientationSin,
  kOrientationCos,
  kVertexCount,
  kCentroidLon,
  kCentroidLat,
  kBBoxWidth,
  kBBoxHeight,
  kHoursSinceStart,
  kHourSin,
  kHourCos,
  kDaySin,
  kDayCos,
  kWindU,
  kWindV,
  kWindSpeed,
  kCurrentU,
  kCurrentV,
  kCurrentSpeed,
  kSst,
  kWaveHeight,
};

/// Auxiliary target components appended after the 25 features.
enum AuxTarget : std::size_t { kAreaRate = 25, kVelocityEast = 26, kVelocityNorth = 27 };

using FeatureVector = std::array<double, kFeatureDim>;
using TargetVector = std::array<double, kTargetDim>;

struct EnvSample {
  double wind_u = 0.0;  // m/s
  double wind_v = 0.0;
  double current_u = 0.0;
  double current_v = 0.0;
  double sst = 0.0;          // deg C
  double wave_height = 0.0;  // m
  UtcSeconds valid_time = 0;
};

struct TimedFeatures {
  UtcSeconds time = 0;
  FeatureVector x{};
};

enum class ScaleClass { Short, Medium };

std::string_view to_string(ScaleClass scale);
ScaleClass scale_from_string(std::string_view text);

struct FeatureSequence {
  std::array<FeatureVector, kWindowLength> window{};
  std::map<int, TargetVector> horizon_targets;  // horizon (hours or days) -> raw target
  ScaleClass scale = ScaleClass::Short;
  UtcSeconds issue_time = 0;  // grid time of the last window step
  std::string spill_id;
};

inline constexpr std::array<int, 4> kHorizons{3, 7, 11, 15};

/// Per-component z-score parameters with +/-3 clipping.
struct Normalizer {
  std::vector<double> mu;
  std::vector<double> sigma;

  std::vector<double> normalize(std::span<const double> x) const;
  std::vector<double> denormalize(std::span<const double> z) const;
};

Normalizer fit_normalizer(std::span<const FeatureVector> train);
Normalizer fit_normalizer(std::span<const std::vector<double>> rows);

/// Full 28-dim target scaling: features share the input normalizer, the three
/// auxiliary rates get their own.
struct TargetScaling {
  Normalizer features;
  Normalizer aux;

  std::vector<double> normalize_input(const FeatureVector& x) const;
  std::vector<double> normalize_target(const TargetVector& y) const;
  TargetVector denormalize_target(std::span<const double> z) const;
};

TargetScaling fit_target_scaling(std::span<const FeatureSequence> train);

FeatureVector extract_features(const ingest::SpillObservation& obs, const EnvSample& env, UtcSeconds t0);

/// Linear interpolation (or extrapolation outside the series span) of the
/// primitive components; derived components (clock encodings, speeds, elapsed
/// hours) are recomputed from the query time so every vector stays consistent.
FeatureVector interpolate(std::span<const TimedFeatures> series, UtcSeconds t, UtcSeconds t0);

/// Area rate (km^2/h) and centroid velocity east/north (km/h) by central
/// differences with step `dt_s`, one-sided at the series ends.
std::array<double, kAuxDim> aux_rates(std::span<const TimedFeatures> series, UtcSeconds t, UtcSeconds t0,
                                      double dt_s);

/// Windows of 16 grid steps (hourly over the first 48 h for Short, daily over
/// days 1-7 for Medium). Grids shorter than 16 points are front-padded by
/// linear trend extrapolation from their first two points. Targets are
/// attached for every horizon that falls inside the series span.
/// Throws InsufficientData with fewer than two grid points.
std::vector<FeatureSequence> build_sequences(std::span<const TimedFeatures> series, ScaleClass scale,
                                             const std::string& spill_id = {});

/// Feature series of an observation set, environment matched by nearest valid time.
std::vector<TimedFeatures> feature_series(std::span<const ingest::SpillObservation> observations,
                                          std::span<const EnvSample> env);

/// Nearest-in-time sample; an empty list yields a calm default.
EnvSample env_at(std::span<const EnvSample> env, UtcSeconds t);

/// Override file: JSON array of {"valid_time": ISO-8601, "wind_u": ..., ...}.
std::vector<EnvSample> parse_env_json(std::string_view text);
std::string write_env_json(std::span<const EnvSample> env);

}  // namespace spillnet::features
