#include "spillnet/geo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spillnet/error.hpp"

namespace spillnet::geo {
namespace {

double cross(Vec2 o, Vec2 a, Vec2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

double signed_area_geo(const Ring& ring) {
  double s = 0.0;
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    const LonLat& p = ring[i];
    const LonLat& q = ring[(i + 1) % n];
    s += p.lon * q.lat - q.lon * p.lat;
  }
  return 0.5 * s;
}

void validate_ring(Ring& ring, const char* what) {
  if (ring.size() >= 2 && ring.front() == ring.back()) ring.pop_back();
  for (const LonLat& p : ring) {
    if (!std::isfinite(p.lon) || !std::isfinite(p.lat) || p.lon < -180.0 || p.lon > 180.0 ||
        p.lat < -90.0 || p.lat > 90.0) {
      throw Error(ErrorCode::InvalidGeometry, std::string(what) + " vertex out of WGS84 range (" +
                                                  std::to_string(p.lon) + ", " +
                                                  std::to_string(p.lat) + ")");
    }
  }
  std::vector<LonLat> distinct(ring);
  std::sort(distinct.begin(), distinct.end(), [](const LonLat& a, const LonLat& b) {
    return a.lon < b.lon || (a.lon == b.lon && a.lat < b.lat);
  });
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 3) {
    throw Error(ErrorCode::InvalidGeometry,
                std::string(what) + " needs at least 3 distinct vertices, got " +
                    std::to_string(distinct.size()));
  }
}

int orient(LonLat a, LonLat b, LonLat c) {
  const double v = (b.lon - a.lon) * (c.lat - a.lat) - (b.lat - a.lat) * (c.lon - a.lon);
  return (v > 0.0) - (v < 0.0);
}

bool on_segment(LonLat a, LonLat b, LonLat p) {
  return std::min(a.lon, b.lon) <= p.lon && p.lon <= std::max(a.lon, b.lon) &&
         std::min(a.lat, b.lat) <= p.lat && p.lat <= std::max(a.lat, b.lat);
}

bool segments_intersect(LonLat p1, LonLat p2, LonLat q1, LonLat q2) {
  const int o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2);
  const int o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

// O(n^2) segment-pair test over the ring with zero-length edges removed.
void check_simple(const Ring& ring) {
  Ring r;
  r.reserve(ring.size());
  for (const LonLat& p : ring) {
    if (r.empty() || !(r.back() == p)) r.push_back(p);
  }
  while (r.size() > 1 && r.front() == r.back()) r.pop_back();
  const std::size_t n = r.size();
  for (std::size_t i = 0; i < n; ++i) {
    const LonLat a1 = r[i], a2 = r[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      const LonLat b1 = r[j], b2 = r[(j + 1) % n];
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) {
        // Adjacent edges share one vertex; they only conflict if they fold back.
        const LonLat shared = (j == i + 1) ? a2 : a1;
        const LonLat other_a = (j == i + 1) ? a1 : a2;
        const LonLat other_b = (j == i + 1) ? b2 : b1;
        if (orient(other_a, shared, other_b) == 0) {
          const double dot = (other_a.lon - shared.lon) * (other_b.lon - shared.lon) +
                             (other_a.lat - shared.lat) * (other_b.lat - shared.lat);
          if (dot > 0.0) {
            throw Error(ErrorCode::InvalidGeometry, "exterior ring folds back on itself at vertex " +
                                                        std::to_string((j == i + 1) ? j : i));
          }
        }
        continue;
      }
      if (segments_intersect(a1, a2, b1, b2)) {
        throw Error(ErrorCode::InvalidGeometry, "exterior ring self-intersects (edges " +
                                                    std::to_string(i) + " and " +
                                                    std::to_string(j) + ")");
      }
    }
  }
}

double ring_perimeter_geo(const Ring& ring) {
  double p = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) p += haversine_km(ring[i], ring[(i + 1) % ring.size()]);
  return p;
}

PlanarRing project_ring(const Ring& ring, const LocalFrame& frame) {
  PlanarRing out;
  out.reserve(ring.size());
  for (const LonLat& p : ring) out.push_back(frame.to_local(p));
  return out;
}

}  // namespace

GeoPolygon::GeoPolygon(Ring exterior, std::vector<Ring> holes)
    : exterior_(std::move(exterior)), holes_(std::move(holes)) {
  validate_ring(exterior_, "exterior");
  check_simple(exterior_);
  if (signed_area_geo(exterior_) < 0.0) std::reverse(exterior_.begin(), exterior_.end());
  for (Ring& hole : holes_) {
    validate_ring(hole, "hole");
    if (signed_area_geo(hole) > 0.0) std::reverse(hole.begin(), hole.end());
  }
}

BBox GeoPolygon::bbox() const noexcept {
  BBox b{exterior_[0].lon, exterior_[0].lat, exterior_[0].lon, exterior_[0].lat};
  for (const LonLat& p : exterior_) {
    b.min_lon = std::min(b.min_lon, p.lon);
    b.max_lon = std::max(b.max_lon, p.lon);
    b.min_lat = std::min(b.min_lat, p.lat);
    b.max_lat = std::max(b.max_lat, p.lat);
  }
  return b;
}

LocalFrame::LocalFrame(LonLat origin) noexcept
    : origin_(origin),
      km_per_deg_lon_(kEarthRadiusKm * std::cos(origin.lat * kDegToRad) * kDegToRad),
      km_per_deg_lat_(kEarthRadiusKm * kDegToRad) {}

Vec2 LocalFrame::to_local(LonLat p) const noexcept {
  return {(p.lon - origin_.lon) * km_per_deg_lon_, (p.lat - origin_.lat) * km_per_deg_lat_};
}

LonLat LocalFrame::to_geo(Vec2 p) const noexcept {
  return {origin_.lon + p.x / km_per_deg_lon_, origin_.lat + p.y / km_per_deg_lat_};
}

LocalFrame frame_about_bbox_center(const GeoPolygon& polygon) {
  const BBox b = polygon.bbox();
  return LocalFrame({0.5 * (b.min_lon + b.max_lon), 0.5 * (b.min_lat + b.max_lat)});
}

PlanarPolygon project_with(const GeoPolygon& polygon, const LocalFrame& frame) {
  PlanarPolygon out{project_ring(polygon.exterior(), frame), {}, frame.origin()};
  for (const Ring& hole : polygon.holes()) out.holes.push_back(project_ring(hole, frame));
  return out;
}

PlanarPolygon project_local(const GeoPolygon& polygon) {
  return project_with(polygon, frame_about_bbox_center(polygon));
}

double signed_area(std::span<const Vec2> ring) {
  double s = 0.0;
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = ring[i], q = ring[(i + 1) % n];
    s += p.x * q.y - q.x * p.y;
  }
  return 0.5 * s;
}

double planar_area(const PlanarPolygon& polygon) {
  double a = std::abs(signed_area(polygon.exterior));
  for (const PlanarRing& hole : polygon.holes) a -= std::abs(signed_area(hole));
  return a;
}

double ring_length(std::span<const Vec2> ring) {
  double p = 0.0;
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = ring[i], b = ring[(i + 1) % n];
    p += std::hypot(b.x - a.x, b.y - a.y);
  }
  return p;
}

double area_km2(const GeoPolygon& polygon) { return planar_area(project_local(polygon)); }

double perimeter_km(const GeoPolygon& polygon) { return ring_perimeter_geo(polygon.exterior()); }

double haversine_km(LonLat a, LonLat b) {
  const double dlat = (b.lat - a.lat) * kDegToRad;
  const double dlon = (b.lon - a.lon) * kDegToRad;
  const double s = std::sin(dlat / 2.0);
  const double t = std::sin(dlon / 2.0);
  const double h = s * s + std::cos(a.lat * kDegToRad) * std::cos(b.lat * kDegToRad) * t * t;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

PlanarRing convex_hull(std::span<const Vec2> points) {
  std::vector<Vec2> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  PlanarRing hull(2 * pts.size());
  std::size_t k = 0;
  for (const Vec2& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

bool point_in_ring(std::span<const Vec2> ring, Vec2 p) {
  bool inside = false;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = ring[i], b = ring[j];
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) inside = !inside;
  }
  return inside;
}

bool point_in_ring(std::span<const LonLat> ring, LonLat p) {
  bool inside = false;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const LonLat a = ring[i], b = ring[j];
    if ((a.lat > p.lat) != (b.lat > p.lat) &&
        p.lon < (b.lon - a.lon) * (p.lat - a.lat) / (b.lat - a.lat) + a.lon) {
      inside = !inside;
    }
  }
  return inside;
}

bool contains(const GeoPolygon& polygon, LonLat p) {
  bool inside = point_in_ring(std::span<const LonLat>(polygon.exterior()), p);
  for (const Ring& hole : polygon.holes()) {
    if (point_in_ring(std::span<const LonLat>(hole), p)) inside = !inside;
  }
  return inside;
}

ShapeDescriptors descriptors(const GeoPolygon& polygon) {
  const LocalFrame frame = frame_about_bbox_center(polygon);
  const PlanarPolygon proj = project_with(polygon, frame);
  const double area = planar_area(proj);
  if (!(area > 0.0)) throw Error(ErrorCode::InvalidGeometry, "polygon has non-positive area");
  const double planar_perimeter = ring_length(proj.exterior);

  // Area centroid: exterior is CCW (+), holes CW (-), so signed sums subtract holes.
  double cx = 0.0, cy = 0.0, a_sum = 0.0;
  auto accumulate = [&](const PlanarRing& ring) {
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 p = ring[i], q = ring[(i + 1) % n];
      const double c = p.x * q.y - q.x * p.y;
      cx += (p.x + q.x) * c;
      cy += (p.y + q.y) * c;
      a_sum += c;
    }
  };
  accumulate(proj.exterior);
  for (const PlanarRing& hole : proj.holes) accumulate(hole);
  const Vec2 centroid{cx / (3.0 * a_sum), cy / (3.0 * a_sum)};

  const PlanarRing hull = convex_hull(proj.exterior);
  const double hull_area = std::abs(signed_area(hull));

  // Vertex covariance for aspect ratio and principal orientation.
  const auto& v = proj.exterior;
  double mx = 0.0, my = 0.0;
  for (const Vec2& p : v) {
    mx += p.x;
    my += p.y;
  }
  mx /= static_cast<double>(v.size());
  my /= static_cast<double>(v.size());
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const Vec2& p : v) {
    sxx += (p.x - mx) * (p.x - mx);
    syy += (p.y - my) * (p.y - my);
    sxy += (p.x - mx) * (p.y - my);
  }
  sxx /= static_cast<double>(v.size());
  syy /= static_cast<double>(v.size());
  sxy /= static_cast<double>(v.size());
  const double half_trace = 0.5 * (sxx + syy);
  const double r = std::hypot(sxx - syy, 2.0 * sxy);
  const double lambda1 = half_trace + 0.5 * r;
  const double lambda2 = half_trace - 0.5 * r;
  if (lambda2 < 1e-12) {
    throw Error(ErrorCode::ZeroVarianceShape,
                "vertex covariance minor eigenvalue " + std::to_string(lambda2) + " < 1e-12");
  }
  double sin2t = 0.0, cos2t = 1.0;
  if (r > 1e-12 * (sxx + syy)) {
    sin2t = 2.0 * sxy / r;
    cos2t = (sxx - syy) / r;
  }

  return ShapeDescriptors{
      .area_km2 = area,
      .perimeter_km = perimeter_km(polygon),
      .centroid = frame.to_geo(centroid),
      .compactness = 4.0 * kPi * area / (planar_perimeter * planar_perimeter),
      .convexity = area / hull_area,
      .aspect_ratio = lambda1 / lambda2,
      .orientation_sin2t = sin2t,
      .orientation_cos2t = cos2t,
  };
}

GeoPolygon largest_component(std::span<const GeoPolygon> polygons) {
  if (polygons.empty()) throw Error(ErrorCode::EmptyInput, "largest_component of an empty list");
  std::size_t best = 0;
  double best_area = area_km2(polygons[0]);
  for (std::size_t i = 1; i < polygons.size(); ++i) {
    const double a = area_km2(polygons[i]);
    if (a > best_area) {
      best = i;
      best_area = a;
    }
  }
  return polygons[best];
}

PlanarRing ellipse_ring(Vec2 center, double semi_major, double semi_minor, double theta, int vertices) {
  PlanarRing ring;
  ring.reserve(static_cast<std::size_t>(vertices));
  const double c = std::cos(theta), s = std::sin(theta);
  for (int k = 0; k < vertices; ++k) {
    const double phi = 2.0 * kPi * k / vertices;
    const double u = semi_major * std::cos(phi);
    const double w = semi_minor * std::sin(phi);
    ring.push_back({center.x + u * c - w * s, center.y + u * s + w * c});
  }
  return ring;
}

GeoPolygon ellipse_polygon(LonLat center, double area, double aspect_ratio, double theta, int vertices) {
  if (!(area > 0.0) || !(aspect_ratio >= 1.0) || vertices < 3) {
    throw Error(ErrorCode::InvalidGeometry, "ellipse needs area > 0, aspect >= 1, >= 3 vertices");
  }
  const double n = static_cast<double>(vertices);
  const double ab = area / (0.5 * n * std::sin(2.0 * kPi / n));
  const double axis_ratio = std::sqrt(aspect_ratio);
  const double b = std::sqrt(ab / axis_ratio);
  const double a = b * axis_ratio;
  const LocalFrame frame(center);
  Ring ring;
  ring.reserve(static_cast<std::size_t>(vertices));
  for (const Vec2& p : ellipse_ring({0.0, 0.0}, a, b, theta, vertices)) ring.push_back(frame.to_geo(p));
  return GeoPolygon(std::move(ring));
}

}  // namespace spillnet::geo
