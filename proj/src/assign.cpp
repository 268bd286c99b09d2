#include "spillnet/assign.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spillnet/error.hpp"

namespace spillnet::coord {

namespace {

std::vector<double> cumulative(std::span<const geo::Vec2> ring) {
  std::vector<double> c(ring.size() + 1, 0.0);
  for (std::size_t i = 0; i < ring.size(); ++i) c[i + 1] = c[i] + distance(ring[i], ring[(i + 1) % ring.size()]);
  return c;
}

double wrap(double s, double L) {
  double r = std::fmod(s, L);
  if (r < 0.0) r += L;
  return r;
}

double segment_distance(geo::Vec2 p, geo::Vec2 a, geo::Vec2 b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double u = len2 > 0.0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
  u = std::clamp(u, 0.0, 1.0);
  return distance(p, {a.x + u * vx, a.y + u * vy});
}

}  // namespace

double distance(geo::Vec2 a, geo::Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  for (const auto& row : cost) {
    if (row.size() != n) throw Error(ErrorCode::ShapeMismatch, "hungarian needs a square cost matrix");
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based potentials; p[j] is the row matched to column j.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> result(n, -1);
  for (std::size_t j = 1; j <= n; ++j) result[p[j] - 1] = static_cast<int>(j - 1);
  return result;
}

geo::Vec2 point_at(std::span<const geo::Vec2> ring, double s) {
  const auto c = cumulative(ring);
  const double L = c.back();
  s = wrap(s, L);
  const auto it = std::upper_bound(c.begin(), c.end(), s);
  const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - c.begin()) - 1, ring.size() - 1);
  const double seg = c[i + 1] - c[i];
  const double u = seg > 0.0 ? (s - c[i]) / seg : 0.0;
  const geo::Vec2 a = ring[i], b = ring[(i + 1) % ring.size()];
  return {a.x + u * (b.x - a.x), a.y + u * (b.y - a.y)};
}

std::vector<geo::Vec2> arc_waypoints(std::span<const geo::Vec2> ring, double s0, double length, double spacing) {
  const auto c = cumulative(ring);
  const double L = c.back();
  const std::size_t n = ring.size();
  // Breakpoints: the arc ends plus every ring vertex strictly inside the arc.
  std::vector<double> marks{0.0};
  const double start = wrap(s0, L);
  for (int lap = 0; lap <= static_cast<int>(std::ceil(length / L)) + 1; ++lap) {
    for (std::size_t i = 0; i < n; ++i) {
      const double rel = c[i] + lap * L - start;
      if (rel > 0.0 && rel < length) marks.push_back(rel);
    }
  }
  marks.push_back(length);
  std::ranges::sort(marks);
  std::vector<geo::Vec2> out{point_at(ring, start)};
  for (std::size_t k = 0; k + 1 < marks.size(); ++k) {
    const double a = marks[k], b = marks[k + 1];
    if (b - a <= 0.0) continue;
    const geo::Vec2 pa = point_at(ring, start + a);
    const geo::Vec2 pb = point_at(ring, start + b);
    const int pieces = std::max(1, static_cast<int>(std::ceil(distance(pa, pb) / spacing - 1e-12)));
    for (int q = 1; q <= pieces; ++q) {
      const double u = static_cast<double>(q) / pieces;
      out.push_back({pa.x + u * (pb.x - pa.x), pa.y + u * (pb.y - pa.y)});
    }
  }
  return out;
}

Assignment assign_paths(std::span<const geo::Vec2> boundary, std::span<const geo::Vec2> positions,
                        const PlanningConfig& config) {
  if (positions.empty()) throw Error(ErrorCode::EmptyFleet, "no vehicles to assign");
  if (boundary.size() < 3) throw Error(ErrorCode::InvalidGeometry, "boundary needs at least 3 vertices");
  const double L = cumulative(boundary).back();
  if (!(L > 0.0) || !std::isfinite(L)) throw Error(ErrorCode::InvalidGeometry, "boundary has no length");
  const std::size_t N = positions.size();
  const int phases = config.phases_per_vehicle * static_cast<int>(N);
  const double slot = L / static_cast<double>(N);

  Assignment best;
  best.total_transit_km = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> cost(N, std::vector<double>(N));
  for (int j = 0; j < phases; ++j) {
    const double phi = j * L / phases;
    std::vector<geo::Vec2> starts(N);
    for (std::size_t k = 0; k < N; ++k) starts[k] = point_at(boundary, phi + static_cast<double>(k) * slot);
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t k = 0; k < N; ++k) cost[i][k] = distance(positions[i], starts[k]);
    const auto match = hungarian(cost);
    double total = 0.0;
    for (std::size_t i = 0; i < N; ++i) total += cost[i][static_cast<std::size_t>(match[i])];
    if (total < best.total_transit_km) {
      best.total_transit_km = total;
      best.phase_km = phi;
      best.phase_index = j;
      best.slot_of_vehicle = match;
    }
  }
  best.perimeter_km = L;
  const double margin = config.overlap_fraction * L;
  for (std::size_t i = 0; i < N; ++i) {
    PathPlan plan;
    plan.vehicle = static_cast<int>(i);
    plan.arc_start_km = wrap(best.phase_km + best.slot_of_vehicle[i] * slot, L);
    plan.arc_length_km = slot + margin;
    plan.overlap_margin_km = margin;
    plan.waypoints = arc_waypoints(boundary, plan.arc_start_km, plan.arc_length_km, config.waypoint_spacing_km);
    plan.start = plan.waypoints.front();
    best.plans.push_back(std::move(plan));
  }
  return best;
}

double arc_coverage(std::span<const geo::Vec2> boundary, std::span<const PathPlan> plans, int samples,
                    double tolerance_km) {
  if (samples <= 0 || boundary.size() < 3) return 0.0;
  const double L = cumulative(boundary).back();
  int covered = 0;
  for (int i = 0; i < samples; ++i) {
    const geo::Vec2 p = point_at(boundary, (i + 0.5) * L / samples);
    bool hit = false;
    for (const auto& plan : plans) {
      for (std::size_t k = 0; k + 1 < plan.waypoints.size() && !hit; ++k) {
        hit = segment_distance(p, plan.waypoints[k], plan.waypoints[k + 1]) <= tolerance_km;
      }
      if (hit) break;
    }
    covered += hit;
  }
  return static_cast<double>(covered) / samples;
}

}  // namespace spillnet::coord
