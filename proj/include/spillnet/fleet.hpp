#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spillnet/assign.hpp"
#include "spillnet/bus.hpp"
#include "spillnet/geo.hpp"

namespace spillnet::coord {

enum class Mode { StationKeeping, StartingPosition, OilPath, Returning };
std::string_view to_string(Mode mode);

/// Progress within one boundary cycle; commands never move a vehicle backwards.
enum class Stage { Station = 0, Starting = 1, Path = 2 };

struct Outgoing {
  std::string key;
  std::string value;
  friend bool operator==(const Outgoing&, const Outgoing&) = default;
};

// Message vocabulary.
namespace keys {
inline constexpr std::string_view kStationKeepAll = "STATION_KEEP_ALL";
inline constexpr std::string_view kBoundaryUpdate = "BOUNDARY_UPDATE";
std::string nav_x(int id);
std::string nav_y(int id);
std::string starting_position(int id);
std::string reached(int id);
std::string oil_path(int id);
std::string ret(int id);
}  // namespace keys

/// Vehicle id a key is addressed to, or nullopt for broadcast / shoreside keys.
std::optional<int> addressee(std::string_view key);

struct VehicleState {
  int id = 0;
  Mode mode = Mode::StationKeeping;
  geo::Vec2 position;
  double heading = 0.0;
  std::vector<geo::Vec2> waypoints;
  std::size_t waypoint_index = 0;
  bool loop_flag = false;
  bool awaiting = false;  // at start position, REACHED published
  geo::Vec2 station;
  geo::Vec2 goal;
  geo::Vec2 home;
  std::int64_t cycle = 0;
  Stage stage = Stage::Station;
  std::uint64_t last_seq = 0;
  std::int64_t last_heard = -1;  // tick of the last message from shoreside
  std::int64_t last_reached_tick = -1;
  bool self_returned = false;

  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

VehicleState make_vehicle(int id, geo::Vec2 position, double heading = 0.0);

struct FleetTiming {
  std::int64_t heartbeat_ticks = 6;
  std::int64_t watchdog_ticks = 60;

  friend bool operator==(const FleetTiming&, const FleetTiming&) = default;
};

struct FsmOutput {
  std::vector<Outgoing> outbox;
  std::optional<geo::Vec2> target;  // where the vehicle steers this tick
  std::vector<std::string> malformed;
  std::vector<std::string> events;  // mode changes, self-commanded return
};

/// Processes the inbox in order, then runs the active behavior at `nav` and
/// publishes NAV_X/NAV_Y. Malformed messages are reported and skipped.
FsmOutput fsm_step(VehicleState& state, std::span<const FleetMessage> inbox, geo::Vec2 nav, std::int64_t tick,
                   const PlanningConfig& planning = {}, const FleetTiming& timing = {});

enum class Phase { Idle, CollectPositions, AwaitReached, Containment };
std::string_view to_string(Phase phase);

struct ShoreEvent {
  std::string kind;  // e.g. "cycle_start", "assign", "oil_path", "vehicle_lost", "CRITICAL"
  std::string detail;
};

struct ShoreOutput {
  std::vector<Outgoing> outbox;
  std::vector<ShoreEvent> events;
};

/// Shoreside planner: three-phase workflow per boundary cycle, heartbeat
/// re-broadcast of the current phase's commands, and a NAV-silence watchdog.
class Shoreside {
 public:
  Shoreside(std::vector<int> fleet, PlanningConfig planning = {}, FleetTiming timing = {});

  /// New boundary (local km ring, counter-clockwise). Starts a new cycle.
  ShoreOutput on_boundary(std::vector<geo::Vec2> boundary, std::int64_t tick);

  ShoreOutput step(std::span<const FleetMessage> inbox, std::int64_t tick);

  Phase phase() const { return phase_; }
  std::int64_t cycle() const { return cycle_; }
  const std::vector<int>& active() const { return active_; }
  const std::set<int>& lost() const { return lost_; }
  const std::optional<Assignment>& assignment() const { return assignment_; }
  /// Vehicle ids in assignment order (plan i belongs to assigned_ids()[i]).
  const std::vector<int>& assigned_ids() const { return assigned_ids_; }
  const std::vector<geo::Vec2>& boundary() const { return boundary_; }
  const std::set<int>& reached() const { return reached_; }

  friend bool operator==(const Shoreside&, const Shoreside&) = default;

 private:
  ShoreOutput start_cycle(std::int64_t tick, const std::string& reason);
  void broadcast_phase(ShoreOutput& out) const;
  void advance(ShoreOutput& out, std::int64_t tick);

  PlanningConfig planning_;
  FleetTiming timing_;
  std::vector<int> fleet_;
  std::vector<int> active_;
  std::set<int> lost_;
  Phase phase_ = Phase::Idle;
  std::int64_t cycle_ = 0;
  std::uint64_t seq_ = 0;
  std::int64_t last_broadcast_ = 0;
  std::vector<geo::Vec2> boundary_;
  std::map<int, std::int64_t> last_nav_;
  std::map<int, std::optional<double>> nav_x_, nav_y_;  // reports tagged with the current cycle
  std::set<int> reached_;
  std::optional<Assignment> assignment_;
  std::vector<int> assigned_ids_;
  std::vector<Outgoing> phase_commands_;
  bool critical_logged_ = false;
};

// Value codecs. parse_* throw MalformedMessage.
struct CycleFlag {
  std::int64_t cycle = 0;
};
struct StartCommand {
  geo::Vec2 point;
  std::int64_t cycle = 0;
  std::uint64_t seq = 0;
};
struct PathCommand {
  std::int64_t cycle = 0;
  std::uint64_t seq = 0;
  std::vector<geo::Vec2> points;
};
struct NavReport {
  double value = 0.0;
  std::int64_t cycle = 0;
  std::uint64_t seq = 0;
};

std::string format_flag(std::int64_t cycle);
CycleFlag parse_flag(std::string_view value);
std::string format_start(const StartCommand& c);
StartCommand parse_start(std::string_view value);
std::string format_path(const PathCommand& c);
PathCommand parse_path(std::string_view value);
std::string format_nav(const NavReport& r);
NavReport parse_nav(std::string_view value);

}  // namespace spillnet::coord
