#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "spillnet/features.hpp"
#include "spillnet/model.hpp"

namespace spillnet::checkpoint {

struct Checkpoint {
  model::Model model;
  features::TargetScaling scaling;
  features::ScaleClass scale = features::ScaleClass::Short;
};

nlohmann::json config_to_json(const model::ModelConfig& config);
model::ModelConfig config_from_json(const nlohmann::json& j);

nlohmann::json normalizer_to_json(const features::Normalizer& n);
features::Normalizer normalizer_from_json(const nlohmann::json& j, const std::string& pointer);

nlohmann::json scaling_to_json(const features::TargetScaling& s);
features::TargetScaling scaling_from_json(const nlohmann::json& j);

/// JSON container: schema_version, config, scale, normalizers and every named
/// tensor with its shape. Doubles round-trip exactly.
std::string to_json(const model::Model& model, const features::TargetScaling& scaling, features::ScaleClass scale);

/// Validates every tensor shape against the stored config.
Checkpoint from_json(std::string_view text);

void save(const std::filesystem::path& path, const model::Model& model, const features::TargetScaling& scaling,
          features::ScaleClass scale);
Checkpoint load(const std::filesystem::path& path);

}  // namespace spillnet::checkpoint
