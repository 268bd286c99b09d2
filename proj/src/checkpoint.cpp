#include "spillnet/checkpoint.hpp"

#include "spillnet/error.hpp"
#include "spillnet/ingest.hpp"
#include "spillnet/jsonutil.hpp"

namespace spillnet::checkpoint {

using json = nlohmann::json;
using jsonutil::get_as;
using jsonutil::get_or;
using jsonutil::require;
using jsonutil::schema_error;

json config_to_json(const model::ModelConfig& c) {
  return {{"core", model::to_string(c.core)},
          {"input_dim", c.input_dim},
          {"hidden", c.hidden},
          {"heads", c.heads},
          {"head_dim", c.head_dim},
          {"output_dim", c.output_dim},
          {"horizons", c.horizons},
          {"lstm_sizes", c.lstm_sizes},
          {"window", c.window},
          {"dt", c.dt}};
}

model::ModelConfig config_from_json(const json& j) {
  const std::string p = "/config";
  model::ModelConfig c;
  c.core = model::core_from_string(get_as<std::string>(j, p, "core"));
  c.input_dim = get_as<std::size_t>(j, p, "input_dim");
  c.hidden = get_as<std::size_t>(j, p, "hidden");
  c.heads = get_as<std::size_t>(j, p, "heads");
  c.head_dim = get_as<std::size_t>(j, p, "head_dim");
  c.output_dim = get_as<std::size_t>(j, p, "output_dim");
  c.horizons = get_as<std::vector<int>>(j, p, "horizons");
  c.lstm_sizes = get_or<std::vector<std::size_t>>(j, p, "lstm_sizes", c.lstm_sizes);
  c.window = get_or<std::size_t>(j, p, "window", c.window);
  c.dt = get_or<double>(j, p, "dt", c.dt);
  c.validate();
  return c;
}

json normalizer_to_json(const features::Normalizer& n) { return {{"mu", n.mu}, {"sigma", n.sigma}}; }

features::Normalizer normalizer_from_json(const json& j, const std::string& pointer) {
  features::Normalizer n;
  n.mu = get_as<std::vector<double>>(j, pointer, "mu");
  n.sigma = get_as<std::vector<double>>(j, pointer, "sigma");
  if (n.mu.size() != n.sigma.size()) schema_error(pointer, "mu and sigma lengths differ");
  for (double s : n.sigma) {
    if (!(s > 0.0)) schema_error(pointer + "/sigma", "entries must be positive");
  }
  return n;
}

json scaling_to_json(const features::TargetScaling& s) {
  return {{"features", normalizer_to_json(s.features)}, {"aux", normalizer_to_json(s.aux)}};
}

features::TargetScaling scaling_from_json(const json& j) {
  features::TargetScaling s;
  s.features = normalizer_from_json(require(j, "/normalizers", "features"), "/normalizers/features");
  s.aux = normalizer_from_json(require(j, "/normalizers", "aux"), "/normalizers/aux");
  if (s.features.mu.size() != features::kFeatureDim || s.aux.mu.size() != features::kAuxDim) {
    schema_error("/normalizers", "expected 25 feature and 3 auxiliary components");
  }
  return s;
}

std::string to_json(const model::Model& m, const features::TargetScaling& scaling, features::ScaleClass scale) {
  json doc;
  doc["schema_version"] = jsonutil::kSchemaVersion;
  doc["kind"] = "spillnet-checkpoint";
  doc["config"] = config_to_json(m.config());
  doc["scale"] = features::to_string(scale);
  doc["normalizers"] = scaling_to_json(scaling);
  json tensors = json::array();
  for (const auto& p : m.params()) {
    tensors.push_back({{"name", p.name},
                       {"shape", {p.value.rows(), p.value.cols()}},
                       {"data", std::vector<double>(p.value.data().begin(), p.value.data().end())}});
  }
  doc["tensors"] = std::move(tensors);
  return doc.dump();
}

Checkpoint from_json(std::string_view text) {
  const json doc = jsonutil::parse(text);
  jsonutil::check_schema_version(doc, true);
  model::ModelConfig config = config_from_json(require(doc, "", "config"));
  features::TargetScaling scaling = scaling_from_json(require(doc, "", "normalizers"));
  const auto scale = features::scale_from_string(get_or<std::string>(doc, "", "scale", "short"));
  const json& arr = require(doc, "", "tensors");
  if (!arr.is_array()) schema_error("/tensors", "expected array");
  std::vector<model::NamedParam> params;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = "/tensors/" + std::to_string(i);
    const auto shape = get_as<std::vector<std::size_t>>(arr[i], p, "shape");
    if (shape.size() != 2) schema_error(p + "/shape", "expected [rows, cols]");
    auto data = get_as<std::vector<double>>(arr[i], p, "data");
    if (data.size() != shape[0] * shape[1]) schema_error(p + "/data", "length does not match shape");
    params.push_back({get_as<std::string>(arr[i], p, "name"), tensor::Tensor::from(shape[0], shape[1], std::move(data))});
  }
  return {model::Model(std::move(config), std::move(params)), std::move(scaling), scale};
}

void save(const std::filesystem::path& path, const model::Model& model, const features::TargetScaling& scaling,
          features::ScaleClass scale) {
  ingest::write_text_file(path, to_json(model, scaling, scale));
}

Checkpoint load(const std::filesystem::path& path) { return from_json(ingest::read_text_file(path)); }

}  // namespace spillnet::checkpoint
