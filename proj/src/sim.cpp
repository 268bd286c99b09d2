#include "spillnet/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "spillnet/bus.hpp"
#include "spillnet/error.hpp"
#include "spillnet/evaluate.hpp"
#include "spillnet/jsonutil.hpp"

namespace spillnet::sim {

using nlohmann::json;

namespace {

constexpr double kTwoPi = 2.0 * geo::kPi;

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

std::string vehicle_agent(int id) { return "vehicle_" + std::to_string(id); }

json vec_json(geo::Vec2 p) { return json::array({p.x, p.y}); }

geo::Vec2 vec_from(const json& j, const std::string& pointer) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    jsonutil::schema_error(pointer, "expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<geo::Vec2> ring_from(const json& j, const std::string& pointer) {
  if (!j.is_array()) jsonutil::schema_error(pointer, "expected array");
  std::vector<geo::Vec2> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(vec_from(j[i], pointer + "/" + std::to_string(i)));
  return out;
}

/// Command payload for the event log; path bodies are summarized.
json command_payload(const coord::Outgoing& m) {
  if (m.key.starts_with("OIL_PATH_UPDATES_")) {
    try {
      const auto c = coord::parse_path(m.value);
      return {{"key", m.key}, {"cycle", c.cycle}, {"seq", c.seq}, {"waypoints", c.points.size()}};
    } catch (const Error&) {
    }
  }
  return {{"key", m.key}, {"value", m.value}};
}

std::vector<geo::Vec2> perimeter_samples(std::span<const geo::Vec2> ring, int n) {
  std::vector<geo::Vec2> out;
  if (ring.size() < 3) return out;
  const double L = geo::ring_length(ring);
  for (int k = 0; k < n; ++k) out.push_back(coord::point_at(ring, (k + 0.5) * L / n));
  return out;
}

}  // namespace

std::int64_t SimConfig::total_ticks() const { return static_cast<std::int64_t>(std::llround(duration_h * 3600.0 / tick_s)); }

std::int64_t SimConfig::replan_ticks() const {
  return std::max<std::int64_t>(1, std::llround(replan_interval_h * 3600.0 / tick_s));
}

void SimConfig::validate() const {
  if (fleet_size < 1) config_error("fleet_size must be >= 1");
  if (!(speed_kmph > 0.0)) config_error("speed_kmph must be > 0");
  if (!(max_turn_rad > 0.0)) config_error("max_turn_rad must be > 0");
  if (!(tick_s > 0.0)) config_error("tick_s must be > 0");
  if (!(duration_h > 0.0)) config_error("duration_h must be > 0");
  if (!(replan_interval_h > 0.0)) config_error("replan_interval_h must be > 0");
  if (!(channel.p_loss >= 0.0 && channel.p_loss < 1.0)) config_error("p_loss must be in [0, 1)");
  if (channel.delay_ticks < 0) config_error("delay_ticks must be >= 0");
  if (timing.heartbeat_ticks < 1 || timing.watchdog_ticks < 1) config_error("timing ticks must be >= 1");
  if (!(sensing_radius_km > 0.0)) config_error("sensing_radius_km must be > 0");
  if (coverage_samples < 1) config_error("coverage_samples must be >= 1");
  if (scenario_kind < 1 || scenario_kind > 5) config_error("scenario_kind must be 1..5");
  for (const auto& f : faults) {
    if (f.vehicle < 1 || f.vehicle > fleet_size) config_error("fault vehicle id out of range");
    if (f.tick < 0) config_error("fault tick must be >= 0");
  }
  if (start_positions && static_cast<int>(start_positions->size()) != fleet_size) {
    config_error("start_positions must list one position per vehicle");
  }
  if (boundary_km && boundary_km->size() < 3) config_error("boundary_km needs at least 3 vertices");
}

SimConfig sim_config_from_json(std::string_view text, SimConfig base) {
  const json doc = jsonutil::parse(text);
  jsonutil::check_schema_version(doc);
  SimConfig c = std::move(base);
  c.scenario_kind = jsonutil::get_or(doc, "", "scenario_kind", c.scenario_kind);
  c.scenario_seed = jsonutil::get_or(doc, "", "scenario_seed", c.scenario_seed);
  c.seed = jsonutil::get_or(doc, "", "seed", c.seed);
  c.fleet_size = jsonutil::get_or(doc, "", "fleet_size", c.fleet_size);
  c.speed_kmph = jsonutil::get_or(doc, "", "speed_kmph", c.speed_kmph);
  c.max_turn_rad = jsonutil::get_or(doc, "", "max_turn_rad", c.max_turn_rad);
  c.tick_s = jsonutil::get_or(doc, "", "tick_s", c.tick_s);
  c.duration_h = jsonutil::get_or(doc, "", "duration_h", c.duration_h);
  c.replan_interval_h = jsonutil::get_or(doc, "", "replan_interval_h", c.replan_interval_h);
  c.channel.p_loss = jsonutil::get_or(doc, "", "p_loss", c.channel.p_loss);
  c.channel.delay_ticks = jsonutil::get_or(doc, "", "delay_ticks", c.channel.delay_ticks);
  c.timing.heartbeat_ticks = jsonutil::get_or(doc, "", "heartbeat_ticks", c.timing.heartbeat_ticks);
  c.timing.watchdog_ticks = jsonutil::get_or(doc, "", "watchdog_ticks", c.timing.watchdog_ticks);
  c.planning.capture_radius_km = jsonutil::get_or(doc, "", "capture_radius_km", c.planning.capture_radius_km);
  c.planning.station_radius_km = jsonutil::get_or(doc, "", "station_radius_km", c.planning.station_radius_km);
  c.planning.waypoint_spacing_km = jsonutil::get_or(doc, "", "waypoint_spacing_km", c.planning.waypoint_spacing_km);
  c.planning.overlap_fraction = jsonutil::get_or(doc, "", "overlap_fraction", c.planning.overlap_fraction);
  c.sensing_radius_km = jsonutil::get_or(doc, "", "sensing_radius_km", c.sensing_radius_km);
  c.standoff_km = jsonutil::get_or(doc, "", "standoff_km", c.standoff_km);
  c.coverage_samples = jsonutil::get_or(doc, "", "coverage_samples", c.coverage_samples);
  if (doc.contains("faults")) {
    const json& fs = doc["faults"];
    if (!fs.is_array()) jsonutil::schema_error("/faults", "expected array");
    c.faults.clear();
    for (std::size_t i = 0; i < fs.size(); ++i) {
      const std::string p = "/faults/" + std::to_string(i);
      c.faults.push_back({jsonutil::get_as<std::int64_t>(fs[i], p, "tick"), jsonutil::get_as<int>(fs[i], p, "vehicle")});
    }
  }
  if (doc.contains("boundary_km")) c.boundary_km = ring_from(doc["boundary_km"], "/boundary_km");
  if (doc.contains("start_positions")) c.start_positions = ring_from(doc["start_positions"], "/start_positions");
  c.validate();
  return c;
}

json sim_config_to_json(const SimConfig& c) {
  json faults = json::array();
  for (const auto& f : c.faults) faults.push_back({{"tick", f.tick}, {"vehicle", f.vehicle}});
  json j = {{"schema_version", jsonutil::kSchemaVersion},
            {"scenario_kind", c.scenario_kind},
            {"scenario_seed", c.scenario_seed},
            {"seed", c.seed},
            {"fleet_size", c.fleet_size},
            {"speed_kmph", c.speed_kmph},
            {"max_turn_rad", c.max_turn_rad},
            {"tick_s", c.tick_s},
            {"duration_h", c.duration_h},
            {"replan_interval_h", c.replan_interval_h},
            {"p_loss", c.channel.p_loss},
            {"delay_ticks", c.channel.delay_ticks},
            {"heartbeat_ticks", c.timing.heartbeat_ticks},
            {"watchdog_ticks", c.timing.watchdog_ticks},
            {"capture_radius_km", c.planning.capture_radius_km},
            {"station_radius_km", c.planning.station_radius_km},
            {"waypoint_spacing_km", c.planning.waypoint_spacing_km},
            {"overlap_fraction", c.planning.overlap_fraction},
            {"sensing_radius_km", c.sensing_radius_km},
            {"standoff_km", c.standoff_km},
            {"coverage_samples", c.coverage_samples},
            {"faults", faults}};
  auto ring = [](const std::vector<geo::Vec2>& r) {
    json a = json::array();
    for (auto p : r) a.push_back(vec_json(p));
    return a;
  };
  if (c.boundary_km) j["boundary_km"] = ring(*c.boundary_km);
  if (c.start_positions) j["start_positions"] = ring(*c.start_positions);
  return j;
}

Pose vehicle_kinematics(const Pose& pose, std::optional<geo::Vec2> target, double speed_kmph, double max_turn,
                        double dt_s) {
  if (!target) return pose;
  const double dx = target->x - pose.position.x;
  const double dy = target->y - pose.position.y;
  const double dist = std::hypot(dx, dy);
  if (dist == 0.0) return pose;
  const double diff = std::remainder(std::atan2(dy, dx) - pose.heading, kTwoPi);
  const bool clipped = std::abs(diff) > max_turn;
  Pose next;
  next.heading = std::remainder(pose.heading + std::clamp(diff, -max_turn, max_turn), kTwoPi);
  const double step = speed_kmph * dt_s / 3600.0;
  if (!clipped && dist <= step) {
    next.position = *target;
  } else {
    next.position = {pose.position.x + step * std::cos(next.heading), pose.position.y + step * std::sin(next.heading)};
  }
  return next;
}

void EventLog::add(std::int64_t tick, std::string agent, std::string kind, json payload) {
  records_.push_back({tick, std::move(agent), std::move(kind), std::move(payload)});
}

std::size_t EventLog::count(std::string_view kind) const {
  return static_cast<std::size_t>(std::ranges::count_if(records_, [&](const EventRecord& r) { return r.kind == kind; }));
}

std::string EventLog::jsonl() const {
  std::string out;
  for (const auto& r : records_) {
    json line = {{"tick", r.tick}, {"agent", r.agent}, {"kind", r.kind}, {"payload", r.payload}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

json SimMetrics::to_json() const {
  auto opt = [](const std::optional<std::int64_t>& v) { return v ? json(*v) : json(nullptr); };
  json fs = json::array();
  for (const auto& f : faults) {
    fs.push_back({{"tick", f.fault.tick},
                  {"vehicle", f.fault.vehicle},
                  {"detected_tick", opt(f.detected_tick)},
                  {"replan_tick", opt(f.replan_tick)},
                  {"recontained_tick", opt(f.recontained_tick)},
                  {"replan_arcs", f.replan_arcs},
                  {"replan_arc_coverage", f.replan_arc_coverage}});
  }
  constexpr std::size_t kStride = 60;
  json series = json::array();
  for (std::size_t i = 0; i < coverage.size(); i += kStride) series.push_back(coverage[i]);
  return {{"schema_version", jsonutil::kSchemaVersion},
          {"ticks", ticks},
          {"time_to_containment_tick", opt(time_to_containment_tick)},
          {"full_coverage_tick", opt(full_coverage_tick)},
          {"final_coverage", final_coverage},
          {"max_coverage", max_coverage},
          {"cycles", cycles},
          {"safety_violations", safety_violations},
          {"max_step_km", max_step_km},
          {"step_limit_km", step_limit_km},
          {"faults", fs},
          {"assignment_arc_coverage", assignment_arc_coverage},
          {"messages_published", messages_published},
          {"messages_dropped", messages_dropped},
          {"coverage_stride_ticks", kStride},
          {"coverage_series", series}};
}

std::string SimResult::trajectory_geojson() const {
  json features = json::array();
  for (const auto& t : trajectories) {
    json coords = json::array();
    for (auto p : t.points) {
      const auto ll = frame.to_geo(p);
      coords.push_back({ll.lon, ll.lat});
    }
    features.push_back({{"type", "Feature"},
                        {"properties", {{"vehicle", t.vehicle}}},
                        {"geometry", {{"type", "LineString"}, {"coordinates", coords}}}});
  }
  return json{{"type", "FeatureCollection"}, {"features", features}}.dump();
}

Predictor oracle_predictor(std::vector<scenario::ScenarioFrame> frames) {
  if (frames.empty()) throw Error(ErrorCode::EmptyInput, "oracle predictor needs frames");
  return [frames = std::move(frames)](double t_h) {
    const UtcSeconds t0 = frames.front().observation.timestamp;
    const double t = static_cast<double>(t0) + t_h * 3600.0;
    std::size_t best = 0;
    for (std::size_t i = 1; i < frames.size(); ++i) {
      if (std::abs(static_cast<double>(frames[i].observation.timestamp) - t) <
          std::abs(static_cast<double>(frames[best].observation.timestamp) - t)) {
        best = i;
      }
    }
    return frames[best].observation.boundary;
  };
}

Predictor checkpoint_predictor(const checkpoint::Checkpoint& ckpt, std::vector<scenario::ScenarioFrame> frames) {
  if (frames.empty()) throw Error(ErrorCode::EmptyInput, "checkpoint predictor needs frames");
  const auto obs = scenario::observations_of(frames);
  const auto env = scenario::env_of(frames);
  const auto series = features::feature_series(obs, env);
  auto seqs = features::build_sequences(series, ckpt.scale, obs.front().spill_id);
  const int h0 = ckpt.model.config().horizons.front();
  const UtcSeconds lead = static_cast<UtcSeconds>(h0) * (ckpt.scale == features::ScaleClass::Short ? 3600 : 86400);
  auto truth = oracle_predictor(frames);
  const UtcSeconds t0 = obs.front().timestamp;
  return [ckpt, seqs = std::move(seqs), lead, truth, t0, h0](double t_h) {
    const UtcSeconds t = t0 + static_cast<UtcSeconds>(std::llround(t_h * 3600.0));
    const features::FeatureSequence* pick = nullptr;
    for (const auto& s : seqs) {
      if (s.issue_time + lead <= t && (!pick || s.issue_time > pick->issue_time)) pick = &s;
    }
    if (!pick) return truth(t_h);
    std::vector<double> flat;
    for (const auto& row : pick->window) {
      const auto z = ckpt.scaling.normalize_input(row);
      flat.insert(flat.end(), z.begin(), z.end());
    }
    const std::vector<std::vector<double>> batch{flat};
    const auto pred = ckpt.model.predict_batch(batch).front();
    return evaluate::reconstruct_boundary(evaluate::denormalized(pred.at(h0), ckpt.scaling));
  };
}

SimResult run_simulation(const SimConfig& config, const SimHooks& hooks) {
  config.validate();
  const std::int64_t T = config.total_ticks();
  const std::int64_t replan = config.replan_ticks();
  const int N = config.fleet_size;

  SimResult result;
  std::optional<Predictor> predictor = hooks.predictor;
  if (!config.boundary_km) {
    scenario::ScenarioConfig sc;
    sc.kind = config.scenario_kind;
    sc.seed = config.scenario_seed;
    sc.duration_h = std::max(48, static_cast<int>(std::ceil(config.duration_h)) + 1);
    auto frames = scenario::generate_scenario(sc);
    result.frame = geo::frame_about_bbox_center(frames.front().observation.boundary);
    if (!predictor) predictor = oracle_predictor(std::move(frames));
  }
  const geo::LocalFrame frame = result.frame;
  auto boundary_at = [&](double t_h) -> std::vector<geo::Vec2> {
    if (config.boundary_km) return *config.boundary_km;
    return geo::project_with((*predictor)(t_h), frame).exterior;
  };

  const auto first_ring = boundary_at(0.0);
  std::vector<geo::Vec2> starts;
  if (config.start_positions) {
    starts = *config.start_positions;
  } else {
    geo::Vec2 c{};
    for (auto p : first_ring) c = {c.x + p.x / first_ring.size(), c.y + p.y / first_ring.size()};
    double r = 0.0;
    for (auto p : first_ring) r = std::max(r, coord::distance(p, c));
    r += config.standoff_km;
    Rng rng(derive_seed(config.seed, 7));
    for (int i = 0; i < N; ++i) {
      const double a = kTwoPi * (i + rng.uniform(-0.3, 0.3)) / N;
      starts.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
    }
  }

  coord::Bus bus;
  bus.register_agent("shoreside");
  for (const char* p : {"NAV_X_*", "NAV_Y_*", "REACHED_STARTING_POSITION_*"}) bus.subscribe("shoreside", p);
  Channel shore_link(config.channel, derive_seed(config.seed, 1000));

  std::vector<int> ids;
  std::vector<coord::VehicleState> vehicles;
  std::vector<Pose> poses;
  std::vector<Channel> links;
  std::vector<bool> alive(static_cast<std::size_t>(N), true);
  for (int i = 0; i < N; ++i) {
    const int id = i + 1;
    ids.push_back(id);
    const std::string agent = vehicle_agent(id);
    bus.register_agent(agent);
    bus.subscribe(agent, std::string(coord::keys::kStationKeepAll));
    bus.subscribe(agent, coord::keys::starting_position(id));
    bus.subscribe(agent, coord::keys::oil_path(id));
    bus.subscribe(agent, coord::keys::ret(id));
    const double heading = std::atan2(-starts[i].y, -starts[i].x);
    vehicles.push_back(coord::make_vehicle(id, starts[i], heading));
    poses.push_back({starts[i], heading});
    links.emplace_back(config.channel, derive_seed(config.seed, 2000 + static_cast<std::uint64_t>(id)));
    result.trajectories.push_back({id, {starts[i]}});
  }
  coord::Shoreside shore(ids, config.planning, config.timing);

  auto& log = result.log;
  auto& m = result.metrics;
  m.ticks = T;
  m.step_limit_km = config.speed_kmph * config.tick_s / 3600.0;
  for (const auto& f : config.faults) {
    FaultOutcome o;
    o.fault = f;
    m.faults.push_back(o);
  }

  std::map<std::int64_t, std::set<int>> reached_published;
  std::map<std::int64_t, std::vector<int>> assigned_by_cycle;
  std::int64_t coverage_cycle = -1;
  std::vector<geo::Vec2> samples;
  std::vector<bool> covered;
  std::set<std::int64_t> contained_cycles;
  std::set<std::int64_t> full_cycles;

  auto publish_shore = [&](const coord::ShoreOutput& out, std::int64_t tick) {
    for (const auto& e : out.events) log.add(tick, "shoreside", e.kind, {{"detail", e.detail}});
    for (const auto& o : out.outbox) {
      bus.publish("shoreside", o.key, o.value, tick);
      ++m.messages_published;
      log.add(tick, "shoreside", "command", command_payload(o));
    }
  };

  for (std::int64_t t = 0; t < T; ++t) {
    for (const auto& f : config.faults) {
      if (f.tick == t && alive[static_cast<std::size_t>(f.vehicle - 1)]) {
        alive[static_cast<std::size_t>(f.vehicle - 1)] = false;
        log.add(t, vehicle_agent(f.vehicle), "fault", json::object());
      }
    }

    shore_link.send(bus.fetch("shoreside"), t);
    publish_shore(shore.step(shore_link.deliver(t), t), t);
    if (t % replan == 0) {
      const double t_h = static_cast<double>(t) * config.tick_s / 3600.0;
      auto ring = boundary_at(t_h);
      log.add(t, "shoreside", "boundary_update",
              {{"source", "schedule"}, {"vertices", ring.size()}, {"perimeter_km", geo::ring_length(ring)}});
      publish_shore(shore.on_boundary(std::move(ring), t), t);
    }
    if (hooks.ingress) {
      for (auto& u : hooks.ingress()) {
        auto ring = geo::project_with(u.boundary, frame).exterior;
        log.add(t, "shoreside", "boundary_update",
                {{"source", "ingress"}, {"spill_id", u.spill_id}, {"vertices", ring.size()}});
        publish_shore(shore.on_boundary(std::move(ring), t), t);
      }
    }
    if (shore.assignment() && !assigned_by_cycle.contains(shore.cycle())) {
      assigned_by_cycle[shore.cycle()] = shore.assigned_ids();
      const double cov = coord::arc_coverage(shore.boundary(), shore.assignment()->plans);
      m.assignment_arc_coverage.push_back(cov);
      log.add(t, "shoreside", "assignment_check",
              {{"cycle", shore.cycle()}, {"arcs", shore.assignment()->plans.size()}, {"arc_coverage", cov}});
    }

    for (int i = 0; i < N; ++i) {
      const auto k = static_cast<std::size_t>(i);
      if (!alive[k]) continue;
      const std::string agent = vehicle_agent(ids[k]);
      links[k].send(bus.fetch(agent), t);
      const auto inbox = links[k].deliver(t);
      auto out = coord::fsm_step(vehicles[k], inbox, poses[k].position, t, config.planning, config.timing);
      for (const auto& e : out.events) log.add(t, agent, "vehicle_event", {{"detail", e}});
      for (const auto& bad : out.malformed) log.add(t, agent, "malformed", {{"detail", bad}});
      for (const auto& o : out.outbox) {
        bus.publish(agent, o.key, o.value, t);
        ++m.messages_published;
        if (o.key.starts_with("REACHED_STARTING_POSITION_")) {
          const auto flag = coord::parse_flag(o.value);
          reached_published[flag.cycle].insert(ids[k]);
          log.add(t, agent, "reached", {{"cycle", flag.cycle}});
        }
      }
      const Pose next = vehicle_kinematics(poses[k], out.target, config.speed_kmph, config.max_turn_rad, config.tick_s);
      m.max_step_km = std::max(m.max_step_km, coord::distance(poses[k].position, next.position));
      poses[k] = next;
      vehicles[k].heading = next.heading;
      if ((t + 1) % 6 == 0 || t + 1 == T) result.trajectories[k].points.push_back(next.position);
    }

    for (int i = 0; i < N; ++i) {
      const auto k = static_cast<std::size_t>(i);
      if (!alive[k] || vehicles[k].mode != coord::Mode::OilPath) continue;
      const auto c = vehicles[k].cycle;
      auto it = assigned_by_cycle.find(c);
      bool ok = it != assigned_by_cycle.end();
      if (ok) {
        for (int id : it->second) ok = ok && reached_published[c].contains(id);
      }
      if (!ok) {
        ++m.safety_violations;
        log.add(t, vehicle_agent(ids[k]), "safety_violation", {{"cycle", c}});
      }
    }

    if (shore.cycle() != coverage_cycle) {
      coverage_cycle = shore.cycle();
      samples = perimeter_samples(shore.boundary(), config.coverage_samples);
      covered.assign(samples.size(), false);
    }
    for (int i = 0; i < N; ++i) {
      const auto k = static_cast<std::size_t>(i);
      if (!alive[k] || vehicles[k].mode != coord::Mode::OilPath || vehicles[k].cycle != shore.cycle()) continue;
      for (std::size_t s = 0; s < samples.size(); ++s) {
        if (!covered[s] && coord::distance(samples[s], poses[k].position) <= config.sensing_radius_km) covered[s] = true;
      }
    }
    const double cov = samples.empty() ? 0.0
                                       : static_cast<double>(std::ranges::count(covered, true)) / samples.size();
    m.coverage.push_back(cov);
    m.max_coverage = std::max(m.max_coverage, cov);
    if (cov >= 1.0 && !full_cycles.contains(shore.cycle())) {
      full_cycles.insert(shore.cycle());
      if (!m.full_coverage_tick) m.full_coverage_tick = t;
      log.add(t, "monitor", "full_coverage", {{"cycle", shore.cycle()}});
    }

    bool contained = shore.phase() == coord::Phase::Containment && !shore.active().empty();
    for (int id : shore.active()) {
      const auto k = static_cast<std::size_t>(id - 1);
      contained = contained && alive[k] && vehicles[k].mode == coord::Mode::OilPath &&
                  vehicles[k].cycle == shore.cycle();
    }
    if (contained && !contained_cycles.contains(shore.cycle())) {
      contained_cycles.insert(shore.cycle());
      if (!m.time_to_containment_tick) m.time_to_containment_tick = t;
      log.add(t, "monitor", "containment", {{"cycle", shore.cycle()}, {"vehicles", shore.active().size()}});
    }

    for (auto& f : m.faults) {
      if (f.fault.tick > t) continue;
      if (!f.detected_tick && shore.lost().contains(f.fault.vehicle)) f.detected_tick = t;
      if (f.detected_tick && !f.replan_tick && shore.assignment() &&
          std::ranges::find(shore.assigned_ids(), f.fault.vehicle) == shore.assigned_ids().end()) {
        f.replan_tick = t;
        f.replan_arcs = static_cast<int>(shore.assignment()->plans.size());
        f.replan_arc_coverage = coord::arc_coverage(shore.boundary(), shore.assignment()->plans);
      }
      if (f.replan_tick && !f.recontained_tick && contained) f.recontained_tick = t;
    }
  }
  m.final_coverage = m.coverage.empty() ? 0.0 : m.coverage.back();
  m.cycles = shore.cycle();
  m.messages_dropped = shore_link.dropped();
  for (const auto& l : links) m.messages_dropped += l.dropped();
  return result;
}

}  // namespace spillnet::sim
