#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spillnet/lstm.hpp"
#include "spillnet/ltc.hpp"
#include "spillnet/tensor.hpp"

namespace spillnet::model {

using tensor::Tensor;

enum class CoreKind { RK4, FusedExplicit, Euler, LstmBaseline };

/// "rk4", "explicit", "euler", "lstm"
std::string_view to_string(CoreKind core);
CoreKind core_from_string(std::string_view text);
/// Report label, e.g. "LTC RK4" or "LSTM".
std::string_view display_name(CoreKind core);
std::optional<ltc::SolverKind> solver_of(CoreKind core);

struct ModelConfig {
  CoreKind core = CoreKind::RK4;
  std::size_t input_dim = 25;
  std::size_t hidden = 128;
  std::size_t heads = 4;
  std::size_t head_dim = 32;
  std::size_t output_dim = 28;
  std::vector<int> horizons{3, 7, 11, 15};
  std::vector<std::size_t> lstm_sizes{lstm::kLayer1, lstm::kLayer2};
  std::size_t window = 16;
  double dt = 1.0;

  /// Throws ConfigError on inconsistent sizes.
  void validate() const;

  /// Input 25, hidden 8, one head, two horizons; used for gradient checks.
  static ModelConfig miniature(CoreKind core);
};

struct NamedParam {
  std::string name;
  Tensor value;
};

struct ParamSpec {
  std::string name;
  tensor::Shape shape;
};

/// Every parameter of a configuration, in a fixed order.
std::vector<ParamSpec> parameter_layout(const ModelConfig& config);

struct AttentionParams {
  Tensor W_Q, W_K, W_V;  // hidden x (heads * head_dim), applied as states * W
  Tensor W_O;            // (heads * head_dim) x hidden
};

/// Full self-attention over one sequence (T x hidden) with residual: T x hidden.
Tensor attention(const Tensor& states, const AttentionParams& p, std::size_t heads);

/// Row-stochastic T x T weights of one head.
Tensor attention_weights(const Tensor& states, const AttentionParams& p, std::size_t heads, std::size_t head);

struct HorizonPrediction {
  int horizon = 0;
  std::vector<double> mean;
  std::vector<double> uncertainty;
};

struct PredictionSet {
  std::vector<HorizonPrediction> horizons;

  const HorizonPrediction& at(int horizon) const;
};

/// Per-horizon batch outputs, each batch x output_dim.
struct ForwardResult {
  std::vector<Tensor> mean;
  std::vector<Tensor> uncertainty;
};

class Model {
 public:
  Model(ModelConfig config, std::uint64_t seed);
  /// Adopts existing parameters after checking names and shapes against the layout.
  Model(ModelConfig config, std::vector<NamedParam> params);

  const ModelConfig& config() const { return config_; }
  const std::vector<NamedParam>& params() const { return params_; }
  const Tensor& param(std::string_view name) const;
  std::size_t parameter_count() const;

  void set_requires_grad(bool on);
  void zero_grad();
  /// Deep copy of parameter values, detached from any tape.
  Model clone() const;
  void copy_values_from(const Model& other);

  /// steps[t] is batch x input_dim (normalized) for timestep t.
  ForwardResult forward(const std::vector<Tensor>& steps, bool training = false, std::uint64_t seed = 0) const;

  /// Hidden trunk input (batch x core width) before the dense heads.
  Tensor encode(const std::vector<Tensor>& steps, bool training = false, std::uint64_t seed = 0) const;

  /// window is T x input_dim, normalized.
  PredictionSet predict(const Tensor& window) const;
  std::vector<PredictionSet> predict_batch(std::span<const std::vector<double>> windows) const;

  ltc::LtcParams ltc_params() const;
  lstm::LstmParams lstm_params() const;
  AttentionParams attention_params() const;

 private:
  ModelConfig config_;
  std::vector<NamedParam> params_;
};

/// Splits flat row-major T x input windows into per-timestep batch tensors.
std::vector<Tensor> batch_steps(std::span<const std::vector<double>> windows, std::size_t steps, std::size_t input);

}  // namespace spillnet::model
