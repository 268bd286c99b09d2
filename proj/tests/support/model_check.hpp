#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "spillnet/fleet.hpp"

namespace spillnet::testing {

// Exhaustive search over a bounded adversarial message schedule.
//
// Every published message normally arrives one tick later. Each control
// message (anything but NAV reports) may instead be delayed by one or two
// extra ticks or dropped, and one vehicle may crash; each such choice spends
// one unit of budget. Vehicles snap to their steering target every tick.
// States reached at the same tick are deduplicated by value.

struct InFlight {
  std::int64_t due = 0;
  int receiver = 0;  // 0 is shoreside
  coord::FleetMessage message;

  friend bool operator==(const InFlight& a, const InFlight& b) {
    return a.due == b.due && a.receiver == b.receiver && a.message.key == b.message.key &&
           a.message.value == b.message.value;
  }
};

struct McState {
  coord::Shoreside shore;
  std::vector<coord::VehicleState> vehicles;
  std::vector<InFlight> flight;
  int budget = 0;
  int crashed = 0;  // vehicle id, 0 for none
  std::set<std::pair<int, std::int64_t>> reached_published;
  std::map<std::int64_t, std::vector<int>> assigned_by_cycle;

  friend bool operator==(const McState&, const McState&) = default;
};

struct McConfig {
  int vehicles = 2;
  std::int64_t ticks = 50;
  int budget = 2;
  bool allow_crash = true;
  std::optional<std::int64_t> second_boundary_tick;
  coord::PlanningConfig planning;
  coord::FleetTiming timing{3, 10};
};

struct McReport {
  std::uint64_t states = 0;
  std::size_t max_frontier = 0;
  std::uint64_t violations = 0;
  std::string first_violation;
  bool reached_containment = false;
  bool replanned = false;
};

inline std::vector<geo::Vec2> mc_boundary(double side) {
  return {{0, 0}, {side, 0}, {side, side}, {0, side}};
}

inline std::size_t mc_hash(const McState& s) {
  std::size_t h = std::hash<std::int64_t>{}(s.shore.cycle()) * 31 + static_cast<std::size_t>(s.shore.phase());
  auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2); };
  mix(s.shore.reached().size());
  mix(static_cast<std::size_t>(s.budget));
  mix(static_cast<std::size_t>(s.crashed));
  for (const auto& v : s.vehicles) {
    mix(static_cast<std::size_t>(v.mode));
    mix(static_cast<std::size_t>(v.stage));
    mix(static_cast<std::size_t>(v.cycle));
    mix(v.waypoint_index);
    mix(v.awaiting);
    mix(std::hash<double>{}(v.position.x));
    mix(std::hash<double>{}(v.position.y));
    mix(static_cast<std::size_t>(v.last_heard));
  }
  for (const auto& f : s.flight) {
    mix(static_cast<std::size_t>(f.due));
    mix(static_cast<std::size_t>(f.receiver));
    mix(std::hash<std::string>{}(f.message.key));
    mix(std::hash<std::string>{}(f.message.value));
  }
  return h;
}

namespace detail {

inline bool is_control(const std::string& key) { return !key.starts_with("NAV_"); }

inline void route(const coord::Outgoing& o, int from, std::int64_t tick, const std::vector<int>& ids,
                  std::vector<InFlight>& out) {
  coord::FleetMessage m{o.key, o.value, from == 0 ? "shoreside" : "vehicle_" + std::to_string(from), tick, 0};
  if (from != 0) {
    out.push_back({tick + 1, 0, m});
    return;
  }
  if (o.key == coord::keys::kStationKeepAll) {
    for (int id : ids) out.push_back({tick + 1, id, m});
  } else if (auto to = coord::addressee(o.key)) {
    out.push_back({tick + 1, *to, m});
  }
}

// Safety: a vehicle in OilPath for cycle c implies every vehicle assigned in
// cycle c has published REACHED for c.
inline std::optional<std::string> violation(const McState& s) {
  for (const auto& v : s.vehicles) {
    if (v.mode != coord::Mode::OilPath) continue;
    const auto it = s.assigned_by_cycle.find(v.cycle);
    if (it == s.assigned_by_cycle.end()) {
      return "vehicle " + std::to_string(v.id) + " in OilPath for unassigned cycle " + std::to_string(v.cycle);
    }
    for (int id : it->second) {
      if (!s.reached_published.contains({id, v.cycle})) {
        return "vehicle " + std::to_string(v.id) + " in OilPath for cycle " + std::to_string(v.cycle) +
               " before vehicle " + std::to_string(id) + " reached";
      }
    }
  }
  return std::nullopt;
}

}  // namespace detail

inline McReport model_check(const McConfig& cfg) {
  std::vector<int> ids;
  for (int i = 1; i <= cfg.vehicles; ++i) ids.push_back(i);
  const auto boundary = mc_boundary(0.4);
  const auto second = mc_boundary(0.6);

  McState init{coord::Shoreside(ids, cfg.planning, cfg.timing), {}, {}, cfg.budget, 0, {}, {}};
  for (int id : ids) init.vehicles.push_back(coord::make_vehicle(id, {-0.3 * id, -0.2}));
  for (const auto& o : init.shore.on_boundary(boundary, 0).outbox) detail::route(o, 0, 0, ids, init.flight);

  McReport report;
  std::vector<McState> frontier{std::move(init)};
  for (std::int64_t tick = 1; tick <= cfg.ticks; ++tick) {
    std::vector<McState> next;
    std::unordered_map<std::size_t, std::vector<std::size_t>> seen;
    auto add = [&](McState&& s) {
      const std::size_t h = mc_hash(s);
      auto& bucket = seen[h];
      for (std::size_t i : bucket)
        if (next[i] == s) return;
      bucket.push_back(next.size());
      next.push_back(std::move(s));
    };

    for (const auto& from : frontier) {
      // crash choices happen before the tick is processed
      std::vector<int> crash_options{from.crashed};
      if (cfg.allow_crash && from.crashed == 0 && from.budget > 0)
        for (int id : ids) crash_options.push_back(id);

      for (int crash : crash_options) {
        McState s = from;
        if (crash != from.crashed) {
          s.crashed = crash;
          --s.budget;
        }
        std::vector<coord::FleetMessage> shore_in;
        std::map<int, std::vector<coord::FleetMessage>> veh_in;
        std::vector<InFlight> keep;
        for (auto& f : s.flight) {
          if (f.due != tick) {
            keep.push_back(std::move(f));
            continue;
          }
          if (f.receiver == 0) {
            shore_in.push_back(f.message);
          } else {
            veh_in[f.receiver].push_back(f.message);
          }
        }
        s.flight = std::move(keep);

        std::vector<InFlight> fresh;
        auto shore_out = s.shore.step(shore_in, tick);
        if (cfg.second_boundary_tick && *cfg.second_boundary_tick == tick) {
          auto b = s.shore.on_boundary(second, tick);
          shore_out.outbox.insert(shore_out.outbox.end(), b.outbox.begin(), b.outbox.end());
        }
        for (const auto& e : shore_out.events) {
          if (e.kind == "vehicle_lost") report.replanned = true;
        }
        for (const auto& o : shore_out.outbox) detail::route(o, 0, tick, ids, fresh);
        if (s.shore.assignment() && !s.assigned_by_cycle.contains(s.shore.cycle())) {
          s.assigned_by_cycle[s.shore.cycle()] = s.shore.assigned_ids();
        }
        for (auto& v : s.vehicles) {
          if (v.id == s.crashed) continue;
          const auto out = coord::fsm_step(v, veh_in[v.id], v.position, tick, cfg.planning, cfg.timing);
          for (const auto& o : out.outbox) {
            if (o.key == coord::keys::reached(v.id)) {
              s.reached_published.insert({v.id, coord::parse_flag(o.value).cycle});
            }
            detail::route(o, v.id, tick, ids, fresh);
          }
          if (out.target) v.position = *out.target;
        }
        if (s.shore.phase() == coord::Phase::Containment) report.reached_containment = true;

        if (auto bad = detail::violation(s)) {
          if (report.violations++ == 0) report.first_violation = "tick " + std::to_string(tick) + ": " + *bad;
        }

        // adversary over this tick's control messages
        std::vector<std::size_t> control;
        for (std::size_t i = 0; i < fresh.size(); ++i)
          if (detail::is_control(fresh[i].message.key)) control.push_back(i);
        std::function<void(std::size_t, McState&, std::vector<InFlight>&)> choose =
            [&](std::size_t k, McState& base, std::vector<InFlight>& msgs) {
              if (k == control.size()) {
                McState out = base;
                for (const auto& m : msgs)
                  if (m.due >= 0) out.flight.push_back(m);
                add(std::move(out));
                return;
              }
              choose(k + 1, base, msgs);
              if (base.budget == 0) return;
              auto& m = msgs[control[k]];
              const auto due = m.due;
              --base.budget;
              for (std::int64_t extra : {1, 2, -1}) {
                m.due = extra < 0 ? -1 : due + extra;
                choose(k + 1, base, msgs);
              }
              m.due = due;
              ++base.budget;
            };
        choose(0, s, fresh);
      }
    }
    report.states += next.size();
    report.max_frontier = std::max(report.max_frontier, next.size());
    frontier = std::move(next);
  }
  return report;
}

}  // namespace spillnet::testing
