#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "spillnet/features.hpp"
#include "spillnet/geo.hpp"
#include "spillnet/ingest.hpp"

namespace spillnet::scenario {

/// Optional overrides; anything unset is drawn from the seeded generator.
struct ScenarioParams {
  std::optional<double> area0_km2;
  std::optional<double> growth_rate;  // kind 1: 1/h, kind 2-4: km^2/h
  std::optional<double> half_life_h;  // kind 5
  std::optional<double> drift_east_kmph;
  std::optional<double> drift_north_kmph;
  std::optional<double> aspect_ratio;
  std::optional<double> orientation_rad;
  geo::LonLat origin{-88.387222, 28.736667};
  UtcSeconds start_time = 1271894400;  // 2010-04-22T00:00:00Z
  std::string spill_id = "synthetic";
};

struct ScenarioConfig {
  int kind = 2;
  std::uint64_t seed = 0;
  int duration_h = 72;
  int step_h = 1;
  ScenarioParams params;
};

struct ScenarioFrame {
  ingest::SpillObservation observation;
  features::EnvSample env;
};

inline constexpr int kScenarioVertices = 64;

/// Surface drift (km/h) implied by an environment sample: windage * wind + current.
geo::Vec2 drift_velocity_kmph(const features::EnvSample& env);

/// Deterministic in (config, seed). Kinds:
///  1 initial release  - A(t) = A0 (1 + r t), near-circular
///  2 steady growth    - A(t) = A0 + g t, constant drift
///  3 env. forcing     - centroid advected by time-varying wind/current, elongating ellipse
///  4 complex geometry - two drifting lobes sampled as one star-shaped ring
///  5 dispersal        - A(t) = A0 exp(-k t)
std::vector<ScenarioFrame> generate_scenario(const ScenarioConfig& config);

ScenarioConfig scenario_config_from_json(std::string_view text);

std::vector<ingest::SpillObservation> observations_of(const std::vector<ScenarioFrame>& frames);
std::vector<features::EnvSample> env_of(const std::vector<ScenarioFrame>& frames);

}  // namespace spillnet::scenario
