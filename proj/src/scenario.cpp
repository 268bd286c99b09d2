#include "spillnet/scenario.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "spillnet/error.hpp"
#include "spillnet/rng.hpp"

namespace spillnet::scenario {
namespace {

using geo::kPi;
using geo::LonLat;
using geo::Vec2;

struct Ellipse {
  Vec2 center;
  double a, b, theta;
};

Ellipse ellipse_from_area(Vec2 center, double area, double axis_ratio, double theta) {
  const double b = std::sqrt(area / (kPi * axis_ratio));
  return {center, b * axis_ratio, b, theta};
}

// Distance from `p` (inside the ellipse) to its boundary along unit direction `d`.
double ray_exit(const Ellipse& e, Vec2 p, Vec2 d) {
  const double c = std::cos(-e.theta), s = std::sin(-e.theta);
  const Vec2 q{(p.x - e.center.x) * c - (p.y - e.center.y) * s, (p.x - e.center.x) * s + (p.y - e.center.y) * c};
  const Vec2 r{d.x * c - d.y * s, d.x * s + d.y * c};
  const double ia = 1.0 / (e.a * e.a), ib = 1.0 / (e.b * e.b);
  const double qa = r.x * r.x * ia + r.y * r.y * ib;
  const double qb = 2.0 * (q.x * r.x * ia + q.y * r.y * ib);
  const double qc = q.x * q.x * ia + q.y * q.y * ib - 1.0;
  const double disc = std::max(0.0, qb * qb - 4.0 * qa * qc);
  return (-qb + std::sqrt(disc)) / (2.0 * qa);
}

// Polar radius of an origin-centered ellipse at angle alpha from its major axis.
double polar_radius(double a, double b, double alpha) {
  return a * b / std::hypot(b * std::cos(alpha), a * std::sin(alpha));
}

struct Forcing {
  features::EnvSample base;
  // Time-varying parts (kind 3 only).
  double wind_amp = 0.0, wind_omega = 0.0, wind_phase = 0.0;
  double current_amp = 0.0, current_omega = 0.0;

  features::EnvSample at(double t_h) const {
    features::EnvSample e = base;
    if (wind_omega > 0.0) {
      e.wind_u += wind_amp * std::cos(wind_omega * t_h + wind_phase);
      e.wind_v += wind_amp * std::sin(wind_omega * t_h + wind_phase);
    }
    if (current_omega > 0.0) {
      e.current_u += current_amp * std::cos(current_omega * t_h);
      e.current_v += current_amp * std::sin(current_omega * t_h);
    }
    return e;
  }

  // Closed-form time integral of the drift velocity (km).
  Vec2 displacement(double t_h) const {
    const Vec2 v0 = drift_velocity_kmph(base);
    Vec2 x{v0.x * t_h, v0.y * t_h};
    if (wind_omega > 0.0) {
      const double k = 3.6 * features::kWindage * wind_amp / wind_omega;
      x.x += k * (std::sin(wind_omega * t_h + wind_phase) - std::sin(wind_phase));
      x.y -= k * (std::cos(wind_omega * t_h + wind_phase) - std::cos(wind_phase));
    }
    if (current_omega > 0.0) {
      const double k = 3.6 * current_amp / current_omega;
      x.x += k * std::sin(current_omega * t_h);
      x.y -= k * (std::cos(current_omega * t_h) - 1.0);
    }
    return x;
  }
};

template <typename T>
T pick(const std::optional<T>& v, T drawn) {
  return v ? *v : drawn;
}

}  // namespace

Vec2 drift_velocity_kmph(const features::EnvSample& env) {
  return {3.6 * (features::kWindage * env.wind_u + env.current_u),
          3.6 * (features::kWindage * env.wind_v + env.current_v)};
}

std::vector<ScenarioFrame> generate_scenario(const ScenarioConfig& config) {
  if (config.kind < 1 || config.kind > 5) {
    throw Error(ErrorCode::UnknownScenario, "scenario kind " + std::to_string(config.kind) + " not in 1..5");
  }
  if (config.duration_h < 48) throw Error(ErrorCode::ConfigError, "duration_h must be >= 48");
  if (config.step_h < 1) throw Error(ErrorCode::ConfigError, "step_h must be >= 1");
  const ScenarioParams& p = config.params;
  Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(config.kind)));

  // Draw order is fixed so that overriding one parameter never shifts the others.
  const double wind_dir = rng.uniform(0.0, 2.0 * kPi);
  const double wind_speed = rng.uniform(3.0, 8.0);
  const double current_dir = rng.uniform(0.0, 2.0 * kPi);
  const double current_speed = rng.uniform(0.05, 0.25);
  const double sst = rng.uniform(24.0, 29.0);
  const double wave = rng.uniform(0.5, 2.0);
  const double theta0 = pick(p.orientation_rad, rng.uniform(0.0, kPi));
  const double aspect_draw = rng.uniform(1.2, 2.0);
  const double u_area = rng.uniform();
  const double u_growth = rng.uniform();
  const double wind_amp = rng.uniform(3.0, 6.0);
  const double wind_phase = rng.uniform(0.0, 2.0 * kPi);
  const double current_amp = rng.uniform(0.1, 0.2);

  Forcing forcing;
  forcing.base = {wind_speed * std::cos(wind_dir), wind_speed * std::sin(wind_dir),
                  current_speed * std::cos(current_dir), current_speed * std::sin(current_dir), sst, wave, 0};
  if (p.drift_east_kmph || p.drift_north_kmph) {
    forcing.base.wind_u = forcing.base.wind_v = 0.0;
    forcing.base.current_u = p.drift_east_kmph.value_or(0.0) / 3.6;
    forcing.base.current_v = p.drift_north_kmph.value_or(0.0) / 3.6;
  }
  if (config.kind == 3) {
    forcing.wind_amp = wind_amp;
    forcing.wind_omega = 2.0 * kPi / 36.0;
    forcing.wind_phase = wind_phase;
    forcing.current_amp = current_amp;
    forcing.current_omega = 2.0 * kPi / 25.0;
  }

  double area0 = 0.0, growth = 0.0, aspect = pick(p.aspect_ratio, aspect_draw);
  switch (config.kind) {
    case 1:
      area0 = pick(p.area0_km2, 2.0 + 6.0 * u_area);
      growth = pick(p.growth_rate, 0.1 + 0.1 * u_growth);
      aspect = pick(p.aspect_ratio, 1.05 + 0.1 * (aspect_draw - 1.2) / 0.8);
      break;
    case 2:
      area0 = pick(p.area0_km2, 80.0 + 70.0 * u_area);
      growth = pick(p.growth_rate, 4.0 + 6.0 * u_growth);
      break;
    case 3:
    case 4:
      area0 = pick(p.area0_km2, 80.0 + 70.0 * u_area);
      growth = pick(p.growth_rate, 2.0 + 3.0 * u_growth);
      break;
    case 5:
      area0 = pick(p.area0_km2, 780.0);
      growth = std::log(2.0) / pick(p.half_life_h, 240.0);
      break;
  }

  const geo::LocalFrame origin_frame(p.origin);
  std::vector<ScenarioFrame> frames;
  for (int k = 0; k * config.step_h <= config.duration_h; ++k) {
    const double t_h = static_cast<double>(k * config.step_h);
    const UtcSeconds t = p.start_time + static_cast<UtcSeconds>(k) * config.step_h * 3600;
    features::EnvSample env = forcing.at(t_h);
    env.valid_time = t;
    const Vec2 offset = forcing.displacement(t_h);
    const LonLat center = origin_frame.to_geo(offset);

    double area = area0;
    switch (config.kind) {
      case 1: area = area0 * (1.0 + growth * t_h); break;
      case 2:
      case 3:
      case 4: area = std::max(0.1, area0 + growth * t_h); break;
      case 5: area = area0 * std::exp(-growth * t_h); break;
    }

    geo::GeoPolygon boundary = [&] {
      if (config.kind == 3) {
        const Vec2 v = drift_velocity_kmph(env);
        double theta = std::atan2(v.y, v.x);
        if (theta < 0.0) theta += kPi;
        const double stretch = std::min(1.3 + 0.04 * t_h, 5.0);
        return geo::ellipse_polygon(center, area, stretch, theta, kScenarioVertices);
      }
      if (config.kind == 4) {
        const double axis_ratio = std::sqrt(2.0);
        const Ellipse lobe1 = ellipse_from_area({0, 0}, 0.6 * area, axis_ratio, theta0);
        const Ellipse lobe2 = ellipse_from_area({0, 0}, 0.6 * area, axis_ratio, theta0 + kPi / 3.0);
        const double reach = std::min(polar_radius(lobe1.a, lobe1.b, 0.0), polar_radius(lobe2.a, lobe2.b, -kPi / 3.0));
        const double s = 0.6 * reach * std::min(1.0, 0.2 + t_h / 48.0);
        const Vec2 u{std::cos(theta0), std::sin(theta0)};
        const Ellipse e1{{s * u.x, s * u.y}, lobe1.a, lobe1.b, lobe1.theta};
        const Ellipse e2{{-s * u.x, -s * u.y}, lobe2.a, lobe2.b, lobe2.theta};
        const geo::LocalFrame frame(center);
        geo::Ring ring;
        for (int i = 0; i < kScenarioVertices; ++i) {
          const double phi = 2.0 * kPi * i / kScenarioVertices;
          const Vec2 d{std::cos(phi), std::sin(phi)};
          const double r = std::max(ray_exit(e1, {0, 0}, d), ray_exit(e2, {0, 0}, d));
          ring.push_back(frame.to_geo({r * d.x, r * d.y}));
        }
        return geo::GeoPolygon(std::move(ring));
      }
      return geo::ellipse_polygon(center, area, aspect, theta0, kScenarioVertices);
    }();

    frames.push_back({ingest::SpillObservation{t, std::move(boundary), "scenario-" + std::to_string(config.kind),
                                               p.spill_id},
                      env});
  }
  return frames;
}

ScenarioConfig scenario_config_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, std::string("/: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::SchemaError, "/: expected object");
  ScenarioConfig c;
  auto num = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key)) return std::nullopt;
    if (!j[key].is_number()) throw Error(ErrorCode::SchemaError, std::string("/") + key + ": expected number");
    return j[key].get<double>();
  };
  if (auto v = num("kind")) c.kind = static_cast<int>(*v);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) {
      throw Error(ErrorCode::SchemaError, "/seed: expected unsigned integer");
    }
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (auto v = num("duration_h")) c.duration_h = static_cast<int>(*v);
  if (auto v = num("step_h")) c.step_h = static_cast<int>(*v);
  c.params.area0_km2 = num("area0_km2");
  c.params.growth_rate = num("growth_rate");
  c.params.half_life_h = num("half_life_h");
  c.params.drift_east_kmph = num("drift_east_kmph");
  c.params.drift_north_kmph = num("drift_north_kmph");
  c.params.aspect_ratio = num("aspect_ratio");
  c.params.orientation_rad = num("orientation_rad");
  if (auto v = num("origin_lon")) c.params.origin.lon = *v;
  if (auto v = num("origin_lat")) c.params.origin.lat = *v;
  if (j.contains("start_time")) c.params.start_time = parse_iso8601(j["start_time"].get<std::string>());
  if (j.contains("spill_id")) c.params.spill_id = j["spill_id"].get<std::string>();
  return c;
}

std::vector<ingest::SpillObservation> observations_of(const std::vector<ScenarioFrame>& frames) {
  std::vector<ingest::SpillObservation> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(f.observation);
  return out;
}

std::vector<features::EnvSample> env_of(const std::vector<ScenarioFrame>& frames) {
  std::vector<features::EnvSample> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(f.env);
  return out;
}

}  // namespace spillnet::scenario
