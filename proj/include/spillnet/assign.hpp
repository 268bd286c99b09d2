#pragma once

#include <span>
#include <vector>

#include "spillnet/geo.hpp"

namespace spillnet::coord {

struct PlanningConfig {
  double capture_radius_km = 0.05;
  double station_radius_km = 0.1;
  double waypoint_spacing_km = 0.5;
  double overlap_fraction = 0.02;
  int phases_per_vehicle = 8;

  friend bool operator==(const PlanningConfig&, const PlanningConfig&) = default;
};

struct PathPlan {
  int vehicle = 0;  // index into the input positions
  geo::Vec2 start;
  std::vector<geo::Vec2> waypoints;  // starts at `start`
  double arc_start_km = 0.0;         // arc-length offset from ring vertex 0
  double arc_length_km = 0.0;        // slot length plus overlap
  double overlap_margin_km = 0.0;

  friend bool operator==(const PathPlan&, const PathPlan&) = default;
};

struct Assignment {
  std::vector<PathPlan> plans;  // one per vehicle, in input order
  std::vector<int> slot_of_vehicle;
  double total_transit_km = 0.0;
  double phase_km = 0.0;
  int phase_index = 0;
  double perimeter_km = 0.0;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// Minimum-cost perfect matching on a square cost matrix; result[row] = column.
std::vector<int> hungarian(const std::vector<std::vector<double>>& cost);

/// Point at arc length `s` (wrapped) along the closed ring from vertex 0.
geo::Vec2 point_at(std::span<const geo::Vec2> ring, double s);

/// Closed-ring polyline from arc length s0 to s0 + length, vertices included,
/// segments subdivided so no gap exceeds `spacing`.
std::vector<geo::Vec2> arc_waypoints(std::span<const geo::Vec2> ring, double s0, double length, double spacing);

/// Equal arc slots, the best of phases_per_vehicle * N rotations (lowest index on
/// ties), vehicles matched to slot starts by straight-line distance.
/// Throws EmptyFleet, InvalidGeometry.
Assignment assign_paths(std::span<const geo::Vec2> boundary, std::span<const geo::Vec2> positions,
                        const PlanningConfig& config = {});

/// Fraction of `samples` evenly spaced perimeter points lying on some plan's waypoint polyline.
double arc_coverage(std::span<const geo::Vec2> boundary, std::span<const PathPlan> plans, int samples = 2000,
                    double tolerance_km = 1e-6);

double distance(geo::Vec2 a, geo::Vec2 b);

}  // namespace spillnet::coord
