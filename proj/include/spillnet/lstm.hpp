#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "spillnet/rng.hpp"
#include "spillnet/tensor.hpp"

namespace spillnet::lstm {

using tensor::Tensor;

/// Gate weights are hidden x (hidden + input) acting on [h_prev, x_t];
/// biases are 1 x hidden rows.
struct LayerParams {
  Tensor W_f, W_i, W_C, W_o;
  Tensor b_f, b_i, b_C, b_o;

  std::size_t hidden() const { return W_f.rows(); }
  std::size_t input() const { return W_f.cols() - W_f.rows(); }
};

struct LstmParams {
  std::vector<LayerParams> layers;
  double dropout_p = 0.1;

  std::size_t output_size() const { return layers.back().hidden(); }
};

inline constexpr std::size_t kLayer1 = 128;
inline constexpr std::size_t kLayer2 = 64;
inline constexpr double kDropout = 0.1;

/// Uniform +/-1/sqrt(fan_in) weights, zero biases except b_f = 1.
LstmParams init_params(std::size_t input, const std::vector<std::size_t>& sizes, Rng& rng, bool requires_grad = true);

struct CellOutput {
  Tensor h;
  Tensor c;
};

/// One step for a batch: x_t is batch x input, h_prev and c_prev batch x hidden.
CellOutput lstm_cell(const Tensor& x_t, const Tensor& h_prev, const Tensor& c_prev, const LayerParams& p);

/// Inverted-dropout mask (batch x width) with keep-probability 1 - p, scaled by 1 / (1 - p).
Tensor dropout_mask(std::size_t rows, std::size_t cols, double p, Rng& rng);

/// Runs every layer over time from zero states; dropout between layers only when training.
/// Returns the last layer's hidden state at every step.
std::vector<Tensor> forward_steps(const std::vector<Tensor>& inputs, const LstmParams& params, bool training,
                                  std::uint64_t seed);

/// Single window (T x input) to its T x output_size hidden states.
Tensor lstm_forward(const Tensor& window, const LstmParams& params, bool training, std::uint64_t seed);

}  // namespace spillnet::lstm
