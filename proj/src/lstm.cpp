#include "spillnet/lstm.hpp"

#include <cmath>

#include "spillnet/error.hpp"

namespace spillnet::lstm {

namespace t = spillnet::tensor;

namespace {

Tensor gate_pre(const Tensor& z, const Tensor& W, const Tensor& b) {
  return t::add(t::matmul(z, t::transpose(W)), t::expand(b, z.rows(), b.cols()));
}

}  // namespace

LstmParams init_params(std::size_t input, const std::vector<std::size_t>& sizes, Rng& rng, bool requires_grad) {
  if (sizes.empty()) throw Error(ErrorCode::ConfigError, "lstm needs at least one layer");
  LstmParams params;
  params.dropout_p = kDropout;
  std::size_t in = input;
  for (std::size_t hidden : sizes) {
    const std::size_t fan_in = hidden + in;
    const double lim = 1.0 / std::sqrt(static_cast<double>(fan_in));
    auto weight = [&] {
      std::vector<double> v(hidden * fan_in);
      for (double& e : v) e = rng.uniform(-lim, lim);
      return Tensor::from(hidden, fan_in, std::move(v), requires_grad);
    };
    LayerParams layer;
    layer.W_f = weight();
    layer.W_i = weight();
    layer.W_C = weight();
    layer.W_o = weight();
    layer.b_f = Tensor::full(1, hidden, 1.0, requires_grad);
    layer.b_i = Tensor::zeros(1, hidden, requires_grad);
    layer.b_C = Tensor::zeros(1, hidden, requires_grad);
    layer.b_o = Tensor::zeros(1, hidden, requires_grad);
    params.layers.push_back(std::move(layer));
    in = hidden;
  }
  return params;
}

CellOutput lstm_cell(const Tensor& x_t, const Tensor& h_prev, const Tensor& c_prev, const LayerParams& p) {
  const std::size_t h = p.hidden();
  if (x_t.cols() != p.input() || h_prev.cols() != h || c_prev.shape() != h_prev.shape() ||
      x_t.rows() != h_prev.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "lstm cell x " + x_t.shape().str() + ", h " + h_prev.shape().str() +
                                              ", c " + c_prev.shape().str() + " for W " + p.W_f.shape().str());
  }
  const Tensor z = t::concat_cols({h_prev, x_t});
  const Tensor f = t::sigmoid(gate_pre(z, p.W_f, p.b_f));
  const Tensor i = t::sigmoid(gate_pre(z, p.W_i, p.b_i));
  const Tensor c_tilde = t::tanh(gate_pre(z, p.W_C, p.b_C));
  const Tensor c = t::add(t::mul(f, c_prev), t::mul(i, c_tilde));
  const Tensor o = t::sigmoid(gate_pre(z, p.W_o, p.b_o));
  return {t::mul(o, t::tanh(c)), c};
}

Tensor dropout_mask(std::size_t rows, std::size_t cols, double p, Rng& rng) {
  const double keep = 1.0 - p;
  std::vector<double> m(rows * cols);
  for (double& e : m) e = rng.uniform() < keep ? 1.0 / keep : 0.0;
  return Tensor::from(rows, cols, std::move(m));
}

std::vector<Tensor> forward_steps(const std::vector<Tensor>& inputs, const LstmParams& params, bool training,
                                  std::uint64_t seed) {
  if (params.layers.empty()) throw Error(ErrorCode::ConfigError, "lstm has no layers");
  Rng rng(seed);
  std::vector<Tensor> seq = inputs;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const LayerParams& layer = params.layers[l];
    if (l > 0 && training && params.dropout_p > 0.0) {
      for (Tensor& s : seq) s = t::mul(s, dropout_mask(s.rows(), s.cols(), params.dropout_p, rng));
    }
    std::vector<Tensor> out;
    out.reserve(seq.size());
    if (seq.empty()) return out;
    Tensor h = Tensor::zeros(seq.front().rows(), layer.hidden());
    Tensor c = h;
    for (const Tensor& x : seq) {
      auto step = lstm_cell(x, h, c, layer);
      h = step.h;
      c = step.c;
      out.push_back(h);
    }
    seq = std::move(out);
  }
  return seq;
}

Tensor lstm_forward(const Tensor& window, const LstmParams& params, bool training, std::uint64_t seed) {
  std::vector<Tensor> inputs;
  for (std::size_t i = 0; i < window.rows(); ++i) inputs.push_back(t::slice(window, i, i + 1, 0, window.cols()));
  const auto states = forward_steps(inputs, params, training, seed);
  if (states.empty()) return Tensor::zeros(0, params.output_size());
  return t::concat_rows(std::span<const Tensor>(states));
}

}  // namespace spillnet::lstm
