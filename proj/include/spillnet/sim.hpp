#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "spillnet/assign.hpp"
#include "spillnet/channel.hpp"
#include "spillnet/checkpoint.hpp"
#include "spillnet/fleet.hpp"
#include "spillnet/geo.hpp"
#include "spillnet/scenario.hpp"
#include "spillnet/tcp_ingress.hpp"

namespace spillnet::sim {

struct Fault {
  std::int64_t tick = 0;
  int vehicle = 0;
};

struct SimConfig {
  int scenario_kind = 2;
  std::uint64_t scenario_seed = 0;
  std::uint64_t seed = 0;  // channel loss streams and start-position jitter
  int fleet_size = 4;
  double speed_kmph = 10.0;
  double max_turn_rad = 1.5707963267948966;  // per tick
  double tick_s = 10.0;
  double duration_h = 6.0;
  double replan_interval_h = 3.0;
  ChannelConfig channel;
  std::vector<Fault> faults;
  coord::PlanningConfig planning;
  coord::FleetTiming timing;
  double sensing_radius_km = 0.5;
  double standoff_km = 2.0;  // start ring distance outside the first boundary
  int coverage_samples = 720;
  /// Static local-km boundary; when set the scenario is not used.
  std::optional<geo::PlanarRing> boundary_km;
  std::optional<std::vector<geo::Vec2>> start_positions;

  std::int64_t total_ticks() const;
  std::int64_t replan_ticks() const;
  /// Throws ConfigError.
  void validate() const;
};

SimConfig sim_config_from_json(std::string_view text, SimConfig base = {});
nlohmann::json sim_config_to_json(const SimConfig& config);

struct Pose {
  geo::Vec2 position;
  double heading = 0.0;  // radians, counter-clockwise from east
};

/// Turns toward the target by at most max_turn, then advances speed*dt along
/// the new heading; lands on the target when it is within reach and the turn
/// was not clipped. No target means hold.
Pose vehicle_kinematics(const Pose& pose, std::optional<geo::Vec2> target, double speed_kmph, double max_turn,
                        double dt_s);

struct EventRecord {
  std::int64_t tick = 0;
  std::string agent;
  std::string kind;
  nlohmann::json payload;
};

class EventLog {
 public:
  void add(std::int64_t tick, std::string agent, std::string kind, nlohmann::json payload = nlohmann::json::object());
  const std::vector<EventRecord>& records() const { return records_; }
  std::size_t count(std::string_view kind) const;
  std::string jsonl() const;

 private:
  std::vector<EventRecord> records_;
};

struct FaultOutcome {
  Fault fault;
  std::optional<std::int64_t> detected_tick;     // shoreside marked the vehicle lost
  std::optional<std::int64_t> replan_tick;       // first assignment excluding it
  std::optional<std::int64_t> recontained_tick;  // all survivors back in OilPath
  int replan_arcs = 0;
  double replan_arc_coverage = 0.0;
};

struct SimMetrics {
  std::int64_t ticks = 0;
  std::optional<std::int64_t> time_to_containment_tick;
  std::optional<std::int64_t> full_coverage_tick;
  std::vector<double> coverage;  // per tick, cumulative within the current cycle
  double final_coverage = 0.0;
  double max_coverage = 0.0;
  std::int64_t cycles = 0;
  std::int64_t safety_violations = 0;
  double max_step_km = 0.0;
  double step_limit_km = 0.0;
  std::vector<FaultOutcome> faults;
  std::vector<double> assignment_arc_coverage;  // per assignment issued
  std::uint64_t messages_published = 0;
  std::uint64_t messages_dropped = 0;

  nlohmann::json to_json() const;
};

struct Trajectory {
  int vehicle = 0;
  std::vector<geo::Vec2> points;  // local km, one per sampled tick
};

struct SimResult {
  EventLog log;
  SimMetrics metrics;
  std::vector<Trajectory> trajectories;
  geo::LocalFrame frame{geo::LonLat{}};

  /// FeatureCollection of vehicle tracks (lon/lat) in the fixed local frame.
  std::string trajectory_geojson() const;
};

/// Boundary forecast for simulated time `t_h` hours after the scenario start.
using Predictor = std::function<geo::GeoPolygon(double t_h)>;

/// Truth passthrough: the scenario frame nearest t_h.
Predictor oracle_predictor(std::vector<scenario::ScenarioFrame> frames);

/// Forecast from a checkpoint: window issued at least one first-horizon step
/// before t_h, first-horizon prediction turned into a boundary ellipse. Falls
/// back to truth before the first complete window.
Predictor checkpoint_predictor(const checkpoint::Checkpoint& ckpt, std::vector<scenario::ScenarioFrame> frames);

struct SimHooks {
  std::optional<Predictor> predictor;
  /// Polled every tick; any update replaces the scheduled boundary at once.
  std::function<std::vector<BoundaryUpdate>()> ingress;
};

/// Deterministic lockstep run. Throws ConfigError.
SimResult run_simulation(const SimConfig& config, const SimHooks& hooks = {});

}  // namespace spillnet::sim
