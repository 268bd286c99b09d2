#pragma once

#include <span>
#include <vector>

namespace spillnet::geo {

/// Mean Earth radius (IUGG) used by every projection and great-circle formula.
inline constexpr double kEarthRadiusKm = 6371.0088;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDegToRad = kPi / 180.0;

struct LonLat {
  double lon = 0.0;
  double lat = 0.0;
  friend bool operator==(const LonLat&, const LonLat&) = default;
};

/// Planar point in a local tangent frame, km east / km north.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

using Ring = std::vector<LonLat>;
using PlanarRing = std::vector<Vec2>;

struct BBox {
  double min_lon, min_lat, max_lon, max_lat;
};

/// WGS84 polygon with optional holes.
///
/// Construction validates the ring invariants (>= 3 distinct vertices,
/// coordinate ranges, simple exterior) and normalizes winding so the
/// exterior is counter-clockwise and holes are clockwise. A trailing vertex
/// equal to the first one is treated as explicit closure and dropped.
class GeoPolygon {
 public:
  explicit GeoPolygon(Ring exterior, std::vector<Ring> holes = {});

  const Ring& exterior() const noexcept { return exterior_; }
  const std::vector<Ring>& holes() const noexcept { return holes_; }
  BBox bbox() const noexcept;

  friend bool operator==(const GeoPolygon&, const GeoPolygon&) = default;

 private:
  Ring exterior_;
  std::vector<Ring> holes_;
};

/// Equirectangular frame about an origin; x scale uses cos(origin latitude).
class LocalFrame {
 public:
  explicit LocalFrame(LonLat origin) noexcept;

  Vec2 to_local(LonLat p) const noexcept;
  LonLat to_geo(Vec2 p) const noexcept;
  LonLat origin() const noexcept { return origin_; }

 private:
  LonLat origin_;
  double km_per_deg_lon_;
  double km_per_deg_lat_;
};

struct PlanarPolygon {
  PlanarRing exterior;
  std::vector<PlanarRing> holes;
  LonLat origin;
};

struct ShapeDescriptors {
  double area_km2;
  double perimeter_km;
  LonLat centroid;
  double compactness;
  double convexity;
  double aspect_ratio;
  double orientation_sin2t;
  double orientation_cos2t;
};

LocalFrame frame_about_bbox_center(const GeoPolygon& polygon);

/// Projects about the bounding-box center (lon and lat).
PlanarPolygon project_local(const GeoPolygon& polygon);
PlanarPolygon project_with(const GeoPolygon& polygon, const LocalFrame& frame);

double area_km2(const GeoPolygon& polygon);
double perimeter_km(const GeoPolygon& polygon);
ShapeDescriptors descriptors(const GeoPolygon& polygon);

/// Largest by area; ties go to the lowest index. Throws EmptyInput.
GeoPolygon largest_component(std::span<const GeoPolygon> polygons);

double haversine_km(LonLat a, LonLat b);

// Planar helpers shared by evaluation, planning and scenario generation.

/// Shoelace signed area; positive for counter-clockwise rings.
double signed_area(std::span<const Vec2> ring);
double planar_area(const PlanarPolygon& polygon);
double ring_length(std::span<const Vec2> ring);
PlanarRing convex_hull(std::span<const Vec2> points);
bool point_in_ring(std::span<const Vec2> ring, Vec2 p);
bool point_in_ring(std::span<const LonLat> ring, LonLat p);
/// Even-odd test over exterior and holes.
bool contains(const GeoPolygon& polygon, LonLat p);

/// Counter-clockwise n-gon inscribed in an ellipse (parameter angles 2πk/n),
/// semi-axis `semi_major` along direction `theta`.
PlanarRing ellipse_ring(Vec2 center, double semi_major, double semi_minor, double theta,
                        int vertices);

/// Ellipse polygon whose planar n-gon area equals `area_km2` exactly.
/// `aspect_ratio` is the vertex-covariance eigenvalue ratio (axis ratio squared),
/// matching the `aspect_ratio` descriptor of the returned polygon.
GeoPolygon ellipse_polygon(LonLat center, double area_km2, double aspect_ratio, double theta,
                           int vertices = 64);

}  // namespace spillnet::geo
