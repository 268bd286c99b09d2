#include <gtest/gtest.h>

#include <cmath>

#include "spillnet/error.hpp"
#include "spillnet/geo.hpp"

using namespace spillnet;
using namespace spillnet::geo;

namespace {

GeoPolygon square(double lon0, double lat0, double side) {
  return GeoPolygon({{lon0, lat0}, {lon0 + side, lat0}, {lon0 + side, lat0 + side}, {lon0, lat0 + side}});
}

GeoPolygon regular(int n, double radius_deg, LonLat c = {0.0, 0.0}, double phase = 0.0) {
  Ring r;
  for (int k = 0; k < n; ++k) {
    const double a = phase + 2.0 * kPi * k / n;
    r.push_back({c.lon + radius_deg * std::cos(a), c.lat + radius_deg * std::sin(a)});
  }
  return GeoPolygon(r);
}

// Spherical area by midpoint quadrature over 1e-4 degree cells.
double quadrature_area(double lat0, double side) {
  const double cell = 1e-4;
  const int n = static_cast<int>(std::lround(side / cell));
  const double R = kEarthRadiusKm;
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    const double phi = (lat0 + (j + 0.5) * cell) * kDegToRad;
    total += n * R * R * std::cos(phi) * (cell * kDegToRad) * (cell * kDegToRad);
  }
  return total;
}

double hand_haversine(double lon1, double lat1, double lon2, double lat2) {
  const double p1 = lat1 * kDegToRad, p2 = lat2 * kDegToRad;
  const double dp = p2 - p1, dl = (lon2 - lon1) * kDegToRad;
  const double a = std::sin(dp / 2) * std::sin(dp / 2) + std::cos(p1) * std::cos(p2) * std::sin(dl / 2) * std::sin(dl / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(a));
}

}  // namespace

TEST(Geo, ProjectionScaleAtEquatorAndSixty) {
  const auto eq = project_local(GeoPolygon({{0, -0.5}, {1, -0.5}, {1, 0.5}, {0, 0.5}}));
  double min_x = 1e9, max_x = -1e9;
  for (auto p : eq.exterior) min_x = std::min(min_x, p.x), max_x = std::max(max_x, p.x);
  EXPECT_NEAR(max_x - min_x, 111.195, 1e-3);

  const auto hi = project_local(GeoPolygon({{0, 59.9}, {1, 59.9}, {1, 60.1}, {0, 60.1}}));
  min_x = 1e9, max_x = -1e9;
  for (auto p : hi.exterior) min_x = std::min(min_x, p.x), max_x = std::max(max_x, p.x);
  EXPECT_NEAR(max_x - min_x, 55.597, 1e-3);
}

TEST(Geo, DegenerateInputRejected) {
  try {
    GeoPolygon({{0, 0}, {1, 1}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidGeometry);
  }
  try {
    GeoPolygon({{0, 0}, {1, 0}, {1, 95}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidGeometry);
  }
  // bow tie
  EXPECT_THROW(GeoPolygon({{0, 0}, {1, 1}, {1, 0}, {0, 1}}), Error);
}

TEST(Geo, EquatorialSquareAreaMatchesQuadrature) {
  const double oracle = quadrature_area(0.0, 0.1);
  const double a = area_km2(square(0.0, 0.0, 0.1));
  EXPECT_NEAR(a / oracle, 1.0, 1e-3);
  EXPECT_NEAR(a, 123.64, 123.64 * 1e-3);
}

TEST(Geo, AreaIndependentOfWinding) {
  const GeoPolygon ccw = square(10.0, 20.0, 0.1);
  const GeoPolygon cw({{10.0, 20.0}, {10.0, 20.1}, {10.1, 20.1}, {10.1, 20.0}});
  EXPECT_DOUBLE_EQ(area_km2(ccw), area_km2(cw));
}

TEST(Geo, HoleSubtractsArea) {
  const Ring outer{{0, 0}, {0.2, 0}, {0.2, 0.2}, {0, 0.2}};
  const Ring hole{{0.05, 0.05}, {0.15, 0.05}, {0.15, 0.15}, {0.05, 0.15}};
  const GeoPolygon with_hole(outer, {hole});
  const GeoPolygon full(outer);
  EXPECT_NEAR(area_km2(with_hole) / area_km2(full), 0.75, 1e-9);
  const auto pf = project_local(full);
  const auto ph = project_local(with_hole);
  EXPECT_NEAR(planar_area(ph), planar_area(pf) - std::abs(signed_area(ph.holes[0])), 1e-9);
}

TEST(Geo, PerimeterMatchesHandHaversine) {
  const double oracle = hand_haversine(0, 0, 0.1, 0) + hand_haversine(0.1, 0, 0.1, 0.1) +
                        hand_haversine(0.1, 0.1, 0, 0.1) + hand_haversine(0, 0.1, 0, 0);
  const double p = perimeter_km(square(0.0, 0.0, 0.1));
  EXPECT_NEAR(p / oracle, 1.0, 1e-4);
  EXPECT_NEAR(p, 44.478, 44.478 * 1e-4);
}

TEST(Geo, RepeatedVertexDoesNotChangePerimeter) {
  const GeoPolygon dup({{0, 0}, {0.1, 0}, {0.1, 0}, {0.1, 0.1}, {0, 0.1}});
  EXPECT_NEAR(perimeter_km(dup), perimeter_km(square(0, 0, 0.1)), 1e-12);
}

TEST(Geo, UnitSquareCompactnessIsQuarterPi) {
  const auto d = descriptors(square(-0.5, -0.5, 1.0));
  EXPECT_NEAR(d.compactness, kPi / 4.0, 1e-6);
  EXPECT_NEAR(d.convexity, 1.0, 1e-9);
}

TEST(Geo, CircleLimit) {
  const auto d = descriptors(regular(256, 0.05));
  EXPECT_NEAR(d.compactness, 1.0, 1e-3);
  EXPECT_NEAR(d.convexity, 1.0, 1e-6);
  EXPECT_NEAR(d.aspect_ratio, 1.0, 1e-2);
}

TEST(Geo, StarIsNotConvex) {
  Ring r;
  for (int k = 0; k < 10; ++k) {
    const double rad = (k % 2 == 0) ? 0.1 : 0.04;
    const double a = 2.0 * kPi * k / 10;
    r.push_back({rad * std::cos(a), rad * std::sin(a)});
  }
  EXPECT_LT(descriptors(GeoPolygon(r)).convexity, 1.0);
}

TEST(Geo, RegularPolygonsAreConvex) {
  for (int n = 3; n <= 12; ++n) EXPECT_NEAR(descriptors(regular(n, 0.1)).convexity, 1.0, 1e-9) << n;
}

TEST(Geo, DescriptorInvariants) {
  const auto d = descriptors(GeoPolygon({{0, 0}, {0.3, 0.05}, {0.35, 0.2}, {0.1, 0.25}, {-0.05, 0.1}}));
  EXPECT_GT(d.area_km2, 0.0);
  EXPECT_GT(d.perimeter_km, 0.0);
  EXPECT_LE(d.compactness, 1.0 + 1e-9);
  EXPECT_LE(d.convexity, 1.0 + 1e-9);
  EXPECT_GE(d.aspect_ratio, 1.0);
  EXPECT_NEAR(d.orientation_sin2t * d.orientation_sin2t + d.orientation_cos2t * d.orientation_cos2t, 1.0, 1e-9);
}

TEST(Geo, CompactnessScaleInvariantOnPlane) {
  PlanarRing r{{0, 0}, {3, 0.5}, {3.5, 2}, {1, 2.5}, {-0.5, 1}};
  auto compact = [](const PlanarRing& ring) {
    const double a = std::abs(signed_area(ring));
    const double p = ring_length(ring);
    return 4.0 * kPi * a / (p * p);
  };
  PlanarRing scaled;
  for (auto p : r) scaled.push_back({7.5 * p.x, 7.5 * p.y});
  EXPECT_NEAR(compact(r), compact(scaled), 1e-9);
}

TEST(Geo, OrientationStableUnderHalfTurn) {
  const GeoPolygon p({{0, 0}, {0.3, 0.05}, {0.35, 0.2}, {0.1, 0.25}, {-0.05, 0.1}});
  const auto d = descriptors(p);
  Ring rot;
  for (auto v : p.exterior()) rot.push_back({2 * d.centroid.lon - v.lon, 2 * d.centroid.lat - v.lat});
  const auto r = descriptors(GeoPolygon(rot));
  // the reflected ring sits in a slightly different local frame
  EXPECT_NEAR(d.orientation_sin2t, r.orientation_sin2t, 1e-5);
  EXPECT_NEAR(d.orientation_cos2t, r.orientation_cos2t, 1e-5);
}

TEST(Geo, CollinearRejected) {
  // three nearly collinear vertices form a zero-variance shape
  try {
    descriptors(GeoPolygon({{0, 0}, {0.1, 0}, {0.2, 1e-12}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == ErrorCode::ZeroVarianceShape || e.code() == ErrorCode::InvalidGeometry);
  }
}

TEST(Geo, LargestComponent) {
  const GeoPolygon a = square(0, 0, 0.03);
  const GeoPolygon b = square(1, 1, 0.07);
  std::vector<GeoPolygon> v{a, b};
  EXPECT_EQ(largest_component(v), b);
  std::vector<GeoPolygon> same{a, square(0, 0, 0.03)};
  EXPECT_EQ(largest_component(same), a);
  std::vector<GeoPolygon> empty;
  EXPECT_THROW(largest_component(empty), Error);
}

TEST(Geo, EllipsePolygonHitsRequestedArea) {
  const auto p = ellipse_polygon({-88.0, 28.0}, 120.0, 2.0, 0.3);
  const auto d = descriptors(p);
  EXPECT_NEAR(d.area_km2, 120.0, 120.0 * 1e-3);
  EXPECT_NEAR(d.aspect_ratio, 2.0, 2e-2);
}
