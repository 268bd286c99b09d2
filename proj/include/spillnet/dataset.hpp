#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spillnet/features.hpp"

namespace spillnet::dataset {

/// {"schema_version","kind":"spillnet-dataset","sequences":[{"spill_id","issue_time_utc","scale",
///   "window":[[25 values] x 16],"targets":{"<horizon>":[28 values]}}]}
std::string to_json(std::span<const features::FeatureSequence> sequences);
/// Throws ParseError, SchemaError.
std::vector<features::FeatureSequence> from_json(std::string_view text);

void save(const std::filesystem::path& path, std::span<const features::FeatureSequence> sequences);
std::vector<features::FeatureSequence> load(const std::filesystem::path& path);

/// Hourly windows from independent scenario replicas (spill ids "<kind>-<i>")
/// until `windows` complete windows exist; the list is cut to exactly that many.
std::vector<features::FeatureSequence> synthetic_windows(int kind, std::uint64_t seed, std::size_t windows,
                                                         int duration_h = 72);

}  // namespace spillnet::dataset
