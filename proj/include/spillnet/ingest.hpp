#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spillnet/geo.hpp"
#include "spillnet/timeutil.hpp"

namespace spillnet::ingest {

struct SpillObservation {
  UtcSeconds timestamp = 0;
  geo::GeoPolygon boundary;
  std::string source_tag;
  std::string spill_id;
};

/// One decoded shapefile record. `parts` are ring start offsets into `points`.
struct ShapefileRecord {
  int record_number = 0;
  int shape_type = 0;
  std::vector<int> parts;
  std::vector<geo::LonLat> points;
  std::array<double, 4> bbox{};  // xmin, ymin, xmax, ymax
};

inline constexpr int kShapeNull = 0;
inline constexpr int kShapePolygon = 5;
inline constexpr std::size_t kShapefileHeaderBytes = 100;

/// Decodes a .shp byte image (polygon and null records only). Never reads past
/// the file length declared in the header.
std::vector<ShapefileRecord> parse_shapefile(std::span<const std::uint8_t> bytes);

/// Encodes one polygon record per input, exterior rings clockwise and holes
/// counter-clockwise, rings explicitly closed.
std::vector<std::uint8_t> write_shapefile(std::span<const geo::GeoPolygon> polygons);

/// Splits a record into components. Ring 0 is an exterior; later rings with
/// the same winding as ring 0 start new components, rings with the opposite
/// winding are holes of the component that contains them.
std::vector<geo::GeoPolygon> record_polygons(const ShapefileRecord& record);

/// Canonical spill document:
/// {"schema_version": "1.0", "spill_id": str,
///  "observations": [{"timestamp_utc": ISO-8601, "exterior": [[lon,lat],...],
///                    "holes": [[[lon,lat],...],...], "source_tag": str?}]}
/// Returned observations are sorted by timestamp.
std::vector<SpillObservation> parse_spill_json(std::string_view text);
std::string write_spill_json(std::string_view spill_id, std::span<const SpillObservation> observations);

/// Manifest {"<file>.shp": "<ISO-8601>"}; paths relative to the manifest.
/// Each file contributes the largest polygon component found in it.
std::vector<SpillObservation> load_shapefile_series(const std::filesystem::path& manifest,
                                                    const std::string& spill_id);

/// "29°01'35\"N" style coordinates to signed decimal degrees.
double dms_to_decimal(std::string_view text);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace spillnet::ingest
