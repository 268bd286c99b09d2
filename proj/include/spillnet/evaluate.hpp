#pragma once

#include <span>
#include <string>
#include <vector>

#include "spillnet/features.hpp"
#include "spillnet/geo.hpp"
#include "spillnet/ingest.hpp"
#include "spillnet/model.hpp"
#include "spillnet/stats.hpp"

namespace spillnet::evaluate {

inline constexpr int kRasterCells = 512;

/// Raster IoU on the joint bounding box, cells sampled at their centers.
double overlap_ratio(const geo::GeoPolygon& pred, const geo::GeoPolygon& obs, int cells_per_axis = kRasterCells);

struct TimedPoint {
  geo::LonLat position;
  UtcSeconds time = 0;
};

/// Haversine speeds (km/h) between consecutive points. Throws InsufficientData
/// on fewer than 2 points or non-increasing times.
std::vector<double> centroid_speeds(std::span<const TimedPoint> track);

/// Population variance of centroid speeds. Throws InsufficientData below 3 points.
double temporal_consistency(std::span<const TimedPoint> track);

struct ForecastRecord {
  UtcSeconds issue_time = 0;
  model::PredictionSet prediction;  // normalized space
};

struct MetricRow {
  UtcSeconds issue_time = 0;
  UtcSeconds valid_time = 0;
  int horizon = 0;
  double area_pred_km2 = 0.0;
  double area_true_km2 = 0.0;
  double area_abs_err = 0.0;
  double centroid_disp_km = 0.0;
  double overlap = 0.0;
};

struct MetricReport {
  double area_mae = 0.0;
  double centroid_disp_km = 0.0;
  double overlap_ratio = 0.0;  // reported as spatial accuracy
  double temporal_consistency = 0.0;
  double cv_percent = 0.0;
  std::vector<double> drift_velocity;  // km/h between consecutive first-horizon predictions
  std::vector<MetricRow> rows;
};

/// Denormalized predicted features at a horizon.
features::TargetVector denormalized(const model::HorizonPrediction& h, const features::TargetScaling& scaling);

/// Ellipse matching predicted area, aspect ratio, orientation and centroid.
geo::GeoPolygon reconstruct_boundary(const features::TargetVector& raw);

/// Horizon h means h hours (Short) or h days (Medium) after issue. Truth is
/// matched by exact timestamp; a missing one throws AlignmentError.
MetricReport evaluate_run(std::span<const ForecastRecord> forecasts, std::span<const ingest::SpillObservation> truth,
                          const features::TargetScaling& scaling, features::ScaleClass scale,
                          int cells_per_axis = kRasterCells);

std::string report_csv(const MetricReport& report);

}  // namespace spillnet::evaluate
