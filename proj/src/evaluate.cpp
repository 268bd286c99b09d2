#include "spillnet/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "spillnet/error.hpp"

namespace spillnet::evaluate {

namespace {

/// Even-odd coverage of cell centers, one horizontal scanline per cell row.
std::vector<bool> rasterize(const geo::GeoPolygon& poly, const geo::BBox& box, int cells) {
  std::vector<bool> mask(static_cast<std::size_t>(cells) * cells, false);
  const double dx = (box.max_lon - box.min_lon) / cells;
  const double dy = (box.max_lat - box.min_lat) / cells;
  std::vector<const geo::Ring*> rings{&poly.exterior()};
  for (const auto& h : poly.holes()) rings.push_back(&h);
  std::vector<double> xs;
  for (int r = 0; r < cells; ++r) {
    const double y = box.min_lat + (r + 0.5) * dy;
    xs.clear();
    for (const geo::Ring* ring : rings) {
      const std::size_t n = ring->size();
      for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const geo::LonLat a = (*ring)[i], b = (*ring)[j];
        if ((a.lat > y) != (b.lat > y)) xs.push_back(a.lon + (y - a.lat) * (b.lon - a.lon) / (b.lat - a.lat));
      }
    }
    std::ranges::sort(xs);
    std::size_t k = 0;
    for (int c = 0; c < cells; ++c) {
      const double x = box.min_lon + (c + 0.5) * dx;
      while (k < xs.size() && xs[k] <= x) ++k;
      mask[static_cast<std::size_t>(r) * cells + c] = ((xs.size() - k) % 2) == 1;
    }
  }
  return mask;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

double overlap_ratio(const geo::GeoPolygon& pred, const geo::GeoPolygon& obs, int cells_per_axis) {
  if (cells_per_axis <= 0) throw Error(ErrorCode::ConfigError, "cells_per_axis must be positive");
  const auto a = pred.bbox(), b = obs.bbox();
  const geo::BBox box{std::min(a.min_lon, b.min_lon), std::min(a.min_lat, b.min_lat), std::max(a.max_lon, b.max_lon),
                      std::max(a.max_lat, b.max_lat)};
  if (!(box.max_lon > box.min_lon) || !(box.max_lat > box.min_lat)) {
    throw Error(ErrorCode::InvalidGeometry, "degenerate joint bounding box");
  }
  const auto ma = rasterize(pred, box, cells_per_axis);
  const auto mb = rasterize(obs, box, cells_per_axis);
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < ma.size(); ++i) {
    inter += ma[i] && mb[i];
    uni += ma[i] || mb[i];
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<double> centroid_speeds(std::span<const TimedPoint> track) {
  if (track.size() < 2) throw Error(ErrorCode::InsufficientData, "speeds need at least 2 points");
  std::vector<double> speeds;
  for (std::size_t i = 0; i + 1 < track.size(); ++i) {
    const double dt_h = static_cast<double>(track[i + 1].time - track[i].time) / 3600.0;
    if (!(dt_h > 0.0)) throw Error(ErrorCode::InsufficientData, "track times must strictly increase");
    speeds.push_back(geo::haversine_km(track[i].position, track[i + 1].position) / dt_h);
  }
  return speeds;
}

double temporal_consistency(std::span<const TimedPoint> track) {
  if (track.size() < 3) throw Error(ErrorCode::InsufficientData, "temporal consistency needs at least 3 points");
  const auto speeds = centroid_speeds(track);
  const double m = mean_of(speeds);
  double ss = 0.0;
  for (double s : speeds) ss += (s - m) * (s - m);
  return ss / static_cast<double>(speeds.size());
}

features::TargetVector denormalized(const model::HorizonPrediction& h, const features::TargetScaling& scaling) {
  return scaling.denormalize_target(h.mean);
}

geo::GeoPolygon reconstruct_boundary(const features::TargetVector& raw) {
  const double area = std::max(raw[features::kArea], 1e-6);
  const double aspect = std::isfinite(raw[features::kAspectRatio]) ? std::max(raw[features::kAspectRatio], 1.0) : 1.0;
  const double theta = 0.5 * std::atan2(raw[features::kOrientationSin], raw[features::kOrientationCos]);
  const geo::LonLat center{std::clamp(raw[features::kCentroidLon], -180.0, 180.0),
                           std::clamp(raw[features::kCentroidLat], -89.0, 89.0)};
  return geo::ellipse_polygon(center, area, aspect, theta);
}

MetricReport evaluate_run(std::span<const ForecastRecord> forecasts, std::span<const ingest::SpillObservation> truth,
                          const features::TargetScaling& scaling, features::ScaleClass scale, int cells_per_axis) {
  const UtcSeconds step = scale == features::ScaleClass::Short ? 3600 : 86400;
  std::map<UtcSeconds, const ingest::SpillObservation*> by_time;
  for (const auto& o : truth) by_time[o.timestamp] = &o;

  MetricReport report;
  std::map<UtcSeconds, TimedPoint> first_horizon_track;
  std::vector<double> first_horizon_areas;
  for (const auto& rec : forecasts) {
    for (std::size_t k = 0; k < rec.prediction.horizons.size(); ++k) {
      const auto& hp = rec.prediction.horizons[k];
      const UtcSeconds valid = rec.issue_time + hp.horizon * step;
      auto it = by_time.find(valid);
      if (it == by_time.end()) {
        throw Error(ErrorCode::AlignmentError, "no truth at " + format_iso8601(valid) + " for horizon " +
                                                   std::to_string(hp.horizon));
      }
      const auto raw = denormalized(hp, scaling);
      const auto& obs = it->second->boundary;
      const auto d = geo::descriptors(obs);
      MetricRow row;
      row.issue_time = rec.issue_time;
      row.valid_time = valid;
      row.horizon = hp.horizon;
      row.area_pred_km2 = raw[features::kArea];
      row.area_true_km2 = d.area_km2;
      row.area_abs_err = std::abs(row.area_pred_km2 - row.area_true_km2);
      const geo::LonLat centroid{raw[features::kCentroidLon], raw[features::kCentroidLat]};
      row.centroid_disp_km = geo::haversine_km(centroid, d.centroid);
      row.overlap = overlap_ratio(reconstruct_boundary(raw), obs, cells_per_axis);
      report.rows.push_back(row);
      if (k == 0) {
        first_horizon_track[valid] = {centroid, valid};
        first_horizon_areas.push_back(row.area_pred_km2);
      }
    }
  }
  if (report.rows.empty()) throw Error(ErrorCode::AlignmentError, "no forecasts to evaluate");
  double ae = 0.0, disp = 0.0, ov = 0.0;
  for (const auto& r : report.rows) {
    ae += r.area_abs_err;
    disp += r.centroid_disp_km;
    ov += r.overlap;
  }
  const double n = static_cast<double>(report.rows.size());
  report.area_mae = ae / n;
  report.centroid_disp_km = disp / n;
  report.overlap_ratio = ov / n;
  std::vector<TimedPoint> track;
  for (const auto& [t, p] : first_horizon_track) track.push_back(p);
  if (track.size() >= 2) report.drift_velocity = centroid_speeds(track);
  if (track.size() >= 3) report.temporal_consistency = temporal_consistency(track);
  const double mean_area = mean_of(first_horizon_areas);
  if (mean_area != 0.0) report.cv_percent = stats::coefficient_of_variation(first_horizon_areas);
  return report;
}

std::string report_csv(const MetricReport& report) {
  std::string out = "issue_time,valid_time,horizon,area_pred_km2,area_true_km2,area_abs_err,centroid_disp_km,overlap\n";
  char buf[256];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%d,%.10g,%.10g,%.10g,%.10g,%.10g\n", format_iso8601(r.issue_time).c_str(),
                  format_iso8601(r.valid_time).c_str(), r.horizon, r.area_pred_km2, r.area_true_km2, r.area_abs_err,
                  r.centroid_disp_km, r.overlap);
    out += buf;
  }
  return out;
}

}  // namespace spillnet::evaluate
