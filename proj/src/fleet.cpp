#include "spillnet/fleet.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "spillnet/error.hpp"

namespace spillnet::coord {

namespace {

constexpr std::string_view kNavX = "NAV_X_";
constexpr std::string_view kNavY = "NAV_Y_";
constexpr std::string_view kStart = "STARTING_POSITION_UPDATES_";
constexpr std::string_view kReached = "REACHED_STARTING_POSITION_";
constexpr std::string_view kPath = "OIL_PATH_UPDATES_";
constexpr std::string_view kReturn = "RETURN_";

[[noreturn]] void malformed(std::string_view value, const std::string& why) {
  throw Error(ErrorCode::MalformedMessage, "'" + std::string(value) + "': " + why);
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(std::string_view s, std::string_view whole) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) malformed(whole, "bad number");
  return v;
}

template <class Int>
Int to_int(std::string_view s, std::string_view whole) {
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) malformed(whole, "bad integer");
  return v;
}

struct Fields {
  std::string_view bare;
  std::map<std::string_view, std::string_view> kv;
};

/// "bare,k=v,k=v": the leading bare token is optional.
Fields split_fields(std::string_view value) {
  Fields f;
  std::size_t pos = 0;
  bool first = true;
  while (pos <= value.size()) {
    const std::size_t comma = value.find(',', pos);
    const std::string_view tok = value.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    const std::size_t eq = tok.find('=');
    if (eq == std::string_view::npos) {
      if (!first || tok.empty()) malformed(value, "unexpected token '" + std::string(tok) + "'");
      f.bare = tok;
    } else {
      f.kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    first = false;
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return f;
}

std::string_view field(const Fields& f, std::string_view key, std::string_view whole) {
  auto it = f.kv.find(key);
  if (it == f.kv.end()) malformed(whole, "missing " + std::string(key));
  return it->second;
}

std::optional<int> suffix_id(std::string_view key, std::string_view prefix) {
  if (key.substr(0, prefix.size()) != prefix) return std::nullopt;
  const auto rest = key.substr(prefix.size());
  int id = 0;
  const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), id);
  if (ec != std::errc() || ptr != rest.data() + rest.size() || rest.empty()) return std::nullopt;
  return id;
}

void enter_station_keeping(VehicleState& s, geo::Vec2 nav, std::int64_t cycle) {
  s.mode = Mode::StationKeeping;
  s.station = nav;
  s.cycle = cycle;
  s.stage = Stage::Station;
  s.awaiting = false;
  s.loop_flag = false;
  s.waypoints.clear();
  s.waypoint_index = 0;
  s.self_returned = false;
}

}  // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::StationKeeping:
      return "StationKeeping";
    case Mode::StartingPosition:
      return "StartingPosition";
    case Mode::OilPath:
      return "OilPath";
    case Mode::Returning:
      return "Returning";
  }
  return "?";
}

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::Idle:
      return "Idle";
    case Phase::CollectPositions:
      return "CollectPositions";
    case Phase::AwaitReached:
      return "AwaitReached";
    case Phase::Containment:
      return "Containment";
  }
  return "?";
}

namespace keys {
std::string nav_x(int id) { return std::string(kNavX) + std::to_string(id); }
std::string nav_y(int id) { return std::string(kNavY) + std::to_string(id); }
std::string starting_position(int id) { return std::string(kStart) + std::to_string(id); }
std::string reached(int id) { return std::string(kReached) + std::to_string(id); }
std::string oil_path(int id) { return std::string(kPath) + std::to_string(id); }
std::string ret(int id) { return std::string(kReturn) + std::to_string(id); }
}  // namespace keys

std::optional<int> addressee(std::string_view key) {
  for (auto prefix : {kStart, kPath, kReturn}) {
    if (auto id = suffix_id(key, prefix)) return id;
  }
  return std::nullopt;
}

std::string format_flag(std::int64_t cycle) { return "true,cycle=" + std::to_string(cycle); }

CycleFlag parse_flag(std::string_view value) {
  const Fields f = split_fields(value);
  if (f.bare != "true") malformed(value, "expected 'true'");
  return {to_int<std::int64_t>(field(f, "cycle", value), value)};
}

std::string format_start(const StartCommand& c) {
  return "x=" + num(c.point.x) + ",y=" + num(c.point.y) + ",cycle=" + std::to_string(c.cycle) +
         ",seq=" + std::to_string(c.seq);
}

StartCommand parse_start(std::string_view value) {
  const Fields f = split_fields(value);
  if (!f.bare.empty()) malformed(value, "unexpected bare token");
  return {{to_double(field(f, "x", value), value), to_double(field(f, "y", value), value)},
          to_int<std::int64_t>(field(f, "cycle", value), value),
          to_int<std::uint64_t>(field(f, "seq", value), value)};
}

std::string format_path(const PathCommand& c) {
  std::string pts;
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    if (i) pts += ';';
    pts += num(c.points[i].x) + ":" + num(c.points[i].y);
  }
  return "cycle=" + std::to_string(c.cycle) + ",seq=" + std::to_string(c.seq) + ",pts=" + pts;
}

PathCommand parse_path(std::string_view value) {
  const Fields f = split_fields(value);
  if (!f.bare.empty()) malformed(value, "unexpected bare token");
  PathCommand c;
  c.cycle = to_int<std::int64_t>(field(f, "cycle", value), value);
  c.seq = to_int<std::uint64_t>(field(f, "seq", value), value);
  std::string_view pts = field(f, "pts", value);
  while (!pts.empty()) {
    const std::size_t semi = pts.find(';');
    const std::string_view p = pts.substr(0, semi);
    const std::size_t colon = p.find(':');
    if (colon == std::string_view::npos) malformed(value, "point without ':'");
    c.points.push_back({to_double(p.substr(0, colon), value), to_double(p.substr(colon + 1), value)});
    if (semi == std::string_view::npos) break;
    pts = pts.substr(semi + 1);
  }
  if (c.points.empty()) malformed(value, "empty path");
  return c;
}

std::string format_nav(const NavReport& r) {
  return num(r.value) + ",cycle=" + std::to_string(r.cycle) + ",seq=" + std::to_string(r.seq);
}

NavReport parse_nav(std::string_view value) {
  const Fields f = split_fields(value);
  if (f.bare.empty()) malformed(value, "missing coordinate");
  return {to_double(f.bare, value), to_int<std::int64_t>(field(f, "cycle", value), value),
          to_int<std::uint64_t>(field(f, "seq", value), value)};
}

VehicleState make_vehicle(int id, geo::Vec2 position, double heading) {
  VehicleState s;
  s.id = id;
  s.position = position;
  s.heading = heading;
  s.station = position;
  s.goal = position;
  s.home = position;
  return s;
}

FsmOutput fsm_step(VehicleState& s, std::span<const FleetMessage> inbox, geo::Vec2 nav, std::int64_t tick,
                   const PlanningConfig& planning, const FleetTiming& timing) {
  FsmOutput out;
  s.position = nav;
  const Mode before = s.mode;
  for (const auto& m : inbox) {
    const auto to = addressee(m.key);
    const bool broadcast = m.key == keys::kStationKeepAll;
    if (!broadcast && (!to || *to != s.id)) continue;
    s.last_heard = tick;
    try {
      if (broadcast) {
        const auto f = parse_flag(m.value);
        if (f.cycle < s.cycle) continue;
        const bool rejoin = s.mode == Mode::Returning && s.self_returned;
        if (f.cycle > s.cycle || rejoin) enter_station_keeping(s, nav, f.cycle);
      } else if (m.key.starts_with(kStart)) {
        const auto c = parse_start(m.value);
        if (c.cycle < s.cycle) continue;
        if (c.cycle == s.cycle) {
          if (s.stage == Stage::Path) continue;
          if (s.mode == Mode::Returning && !s.self_returned) continue;
          if (s.stage == Stage::Starting && s.mode == Mode::StartingPosition && s.goal == c.point) continue;
        }
        s.mode = Mode::StartingPosition;
        s.goal = c.point;
        s.cycle = c.cycle;
        s.stage = Stage::Starting;
        s.awaiting = false;
        s.loop_flag = false;
        s.waypoints.clear();
        s.waypoint_index = 0;
        s.last_seq = c.seq;
        s.self_returned = false;
      } else if (m.key.starts_with(kPath)) {
        auto c = parse_path(m.value);
        if (c.cycle != s.cycle || s.stage != Stage::Starting || !s.awaiting || s.mode != Mode::StartingPosition) {
          continue;
        }
        s.mode = Mode::OilPath;
        s.waypoints = std::move(c.points);
        s.waypoint_index = 0;
        s.loop_flag = true;
        s.stage = Stage::Path;
        s.awaiting = false;
        s.last_seq = c.seq;
      } else if (m.key.starts_with(kReturn)) {
        s.mode = Mode::Returning;
        s.self_returned = false;
        s.awaiting = false;
        s.loop_flag = false;
        s.waypoints.clear();
        s.waypoint_index = 0;
      }
    } catch (const Error& e) {
      out.malformed.push_back(m.key + ": " + e.what());
    }
  }

  if (s.mode != Mode::Returning && s.last_heard >= 0 && tick - s.last_heard >= timing.watchdog_ticks) {
    s.mode = Mode::Returning;
    s.self_returned = true;
    s.awaiting = false;
    s.loop_flag = false;
    s.waypoints.clear();
    s.waypoint_index = 0;
    out.events.push_back("shoreside_silent");
  }

  const double capture = planning.capture_radius_km;
  switch (s.mode) {
    case Mode::StationKeeping:
      if (distance(nav, s.station) > planning.station_radius_km) out.target = s.station;
      break;
    case Mode::StartingPosition:
      if (!s.awaiting && distance(nav, s.goal) <= capture) {
        s.awaiting = true;
        s.last_reached_tick = tick;
        out.outbox.push_back({keys::reached(s.id), format_flag(s.cycle)});
      } else if (s.awaiting && tick - s.last_reached_tick >= timing.heartbeat_ticks) {
        s.last_reached_tick = tick;
        out.outbox.push_back({keys::reached(s.id), format_flag(s.cycle)});
      }
      if (distance(nav, s.goal) > capture) out.target = s.goal;
      break;
    case Mode::OilPath: {
      if (distance(nav, s.waypoints[s.waypoint_index]) <= capture) {
        ++s.waypoint_index;
        if (s.waypoint_index == s.waypoints.size()) s.waypoint_index = s.loop_flag ? 0 : s.waypoints.size() - 1;
      }
      out.target = s.waypoints[s.waypoint_index];
      break;
    }
    case Mode::Returning:
      if (distance(nav, s.home) > capture) out.target = s.home;
      break;
  }
  if (s.mode != before) out.events.push_back(std::string("mode ") + std::string(to_string(s.mode)));
  out.outbox.push_back({keys::nav_x(s.id), format_nav({nav.x, s.cycle, s.last_seq})});
  out.outbox.push_back({keys::nav_y(s.id), format_nav({nav.y, s.cycle, s.last_seq})});
  return out;
}

Shoreside::Shoreside(std::vector<int> fleet, PlanningConfig planning, FleetTiming timing)
    : planning_(planning), timing_(timing), fleet_(std::move(fleet)), active_(fleet_) {
  for (int id : fleet_) last_nav_[id] = 0;
}

ShoreOutput Shoreside::on_boundary(std::vector<geo::Vec2> boundary, std::int64_t tick) {
  boundary_ = std::move(boundary);
  return start_cycle(tick, "boundary_update");
}

ShoreOutput Shoreside::start_cycle(std::int64_t tick, const std::string& reason) {
  ShoreOutput out;
  nav_x_.clear();
  nav_y_.clear();
  reached_.clear();
  assignment_.reset();
  assigned_ids_.clear();
  phase_commands_.clear();
  if (active_.empty()) {
    phase_ = Phase::Idle;
    if (!critical_logged_) {
      out.events.push_back({"CRITICAL", "no active vehicles"});
      critical_logged_ = true;
    }
    return out;
  }
  ++cycle_;
  phase_ = Phase::CollectPositions;
  phase_commands_.push_back({std::string(keys::kStationKeepAll), format_flag(cycle_)});
  out.events.push_back({"cycle_start", reason + " cycle=" + std::to_string(cycle_)});
  broadcast_phase(out);
  last_broadcast_ = tick;
  return out;
}

void Shoreside::broadcast_phase(ShoreOutput& out) const {
  for (const auto& c : phase_commands_) out.outbox.push_back(c);
}

void Shoreside::advance(ShoreOutput& out, std::int64_t tick) {
  if (phase_ == Phase::CollectPositions) {
    const bool all = std::ranges::all_of(active_, [&](int id) {
      auto x = nav_x_.find(id);
      auto y = nav_y_.find(id);
      return x != nav_x_.end() && y != nav_y_.end() && x->second && y->second;
    });
    if (!all) return;
    std::vector<geo::Vec2> positions;
    for (int id : active_) positions.push_back({*nav_x_[id], *nav_y_[id]});
    assignment_ = assign_paths(boundary_, positions, planning_);
    assigned_ids_ = active_;
    ++seq_;
    phase_commands_.clear();
    for (std::size_t i = 0; i < active_.size(); ++i) {
      phase_commands_.push_back(
          {keys::starting_position(active_[i]), format_start({assignment_->plans[i].start, cycle_, seq_})});
    }
    phase_ = Phase::AwaitReached;
    out.events.push_back({"assign", "cycle=" + std::to_string(cycle_) + " vehicles=" +
                                        std::to_string(active_.size()) + " transit_km=" +
                                        std::to_string(assignment_->total_transit_km)});
    broadcast_phase(out);
    last_broadcast_ = tick;
  }
  if (phase_ == Phase::AwaitReached) {
    if (!std::ranges::all_of(active_, [&](int id) { return reached_.contains(id); })) return;
    ++seq_;
    phase_commands_.clear();
    for (std::size_t i = 0; i < active_.size(); ++i) {
      phase_commands_.push_back(
          {keys::oil_path(active_[i]), format_path({cycle_, seq_, assignment_->plans[i].waypoints})});
    }
    phase_ = Phase::Containment;
    out.events.push_back({"oil_path", "cycle=" + std::to_string(cycle_)});
    broadcast_phase(out);
    last_broadcast_ = tick;
  }
}

ShoreOutput Shoreside::step(std::span<const FleetMessage> inbox, std::int64_t tick) {
  ShoreOutput out;
  for (const auto& m : inbox) {
    try {
      if (auto id = suffix_id(m.key, kNavX); id && last_nav_.contains(*id)) {
        const auto r = parse_nav(m.value);
        last_nav_[*id] = tick;
        if (r.cycle == cycle_) nav_x_[*id] = r.value;
      } else if (auto id = suffix_id(m.key, kNavY); id && last_nav_.contains(*id)) {
        const auto r = parse_nav(m.value);
        last_nav_[*id] = tick;
        if (r.cycle == cycle_) nav_y_[*id] = r.value;
      } else if (auto id = suffix_id(m.key, kReached); id && last_nav_.contains(*id)) {
        const auto f = parse_flag(m.value);
        if (f.cycle == cycle_ && phase_ == Phase::AwaitReached &&
            std::ranges::find(active_, *id) != active_.end()) {
          reached_.insert(*id);
        }
      }
    } catch (const Error& e) {
      out.events.push_back({"malformed", m.key + ": " + e.what()});
    }
  }

  std::vector<int> newly_lost;
  for (int id : active_) {
    if (tick - last_nav_[id] >= timing_.watchdog_ticks) newly_lost.push_back(id);
  }
  if (!newly_lost.empty()) {
    for (int id : newly_lost) {
      lost_.insert(id);
      std::erase(active_, id);
      out.events.push_back({"vehicle_lost", "id=" + std::to_string(id)});
      out.outbox.push_back({keys::ret(id), "true"});
    }
    if (phase_ != Phase::Idle || active_.empty()) {
      auto replan = start_cycle(tick, "replan");
      out.outbox.insert(out.outbox.end(), replan.outbox.begin(), replan.outbox.end());
      out.events.insert(out.events.end(), replan.events.begin(), replan.events.end());
    }
  }

  if (phase_ != Phase::Idle) {
    advance(out, tick);
    if (tick - last_broadcast_ >= timing_.heartbeat_ticks) {
      broadcast_phase(out);
      last_broadcast_ = tick;
    }
  }
  return out;
}

}  // namespace spillnet::coord
