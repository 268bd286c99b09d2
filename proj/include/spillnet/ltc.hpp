#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "spillnet/rng.hpp"
#include "spillnet/tensor.hpp"

namespace spillnet::ltc {

using tensor::Tensor;

enum class SolverKind { RK4, FusedExplicit, Euler };

std::string_view to_string(SolverKind kind);

/// Weights follow (rows x cols) = (hidden x input) and (hidden x hidden);
/// b, log_tau and A are 1 x hidden rows.
struct LtcParams {
  Tensor W_x;
  Tensor W_r;
  Tensor b;
  Tensor log_tau;
  Tensor A;

  std::size_t hidden() const { return W_r.rows(); }
  std::size_t input() const { return W_x.cols(); }
  Tensor tau() const { return tensor::exp(log_tau); }
};

/// W_x, W_r uniform +/-1/sqrt(fan_in), b = 0, log_tau uniform on [ln 0.5, ln 8], A = 1.
LtcParams init_params(std::size_t input, std::size_t hidden, Rng& rng, bool requires_grad = true);

/// Fixed-value parameters (tests and toy systems).
LtcParams constant_params(std::size_t input, std::size_t hidden, double w, double bias, double tau, double amplitude = 1.0);

// States are batch x hidden; inputs batch x input. Each row is one sample.

/// tanh(u W_x^T + x W_r^T + b)
Tensor activation(const Tensor& x, const Tensor& u, const LtcParams& p);

/// (-x + f) / tau
Tensor derivative(const Tensor& x, const Tensor& u, const LtcParams& p);

/// tau / (1 + tau f), diagnostic only.
Tensor effective_tau(const Tensor& x, const Tensor& u, const LtcParams& p);

/// dt / (1 + ||x||_2) per row, as a batch x 1 column.
Tensor adaptive_dt(const Tensor& x, double dt);

/// x' = (x + dt_eff f A) / (1 + dt_eff (1/tau + f)). Throws NumericalError when a
/// denominator is <= 1e-12.
Tensor step_fused(const Tensor& x, const Tensor& u, const LtcParams& p, double dt);

/// Classical RK4 with u held constant over the step.
Tensor step_rk4(const Tensor& x, const Tensor& u, const LtcParams& p, double h);

Tensor step_euler(const Tensor& x, const Tensor& u, const LtcParams& p, double dt);

Tensor step(SolverKind kind, const Tensor& x, const Tensor& u, const LtcParams& p, double dt);

/// One solver step per input, from a zero state. Returns the state after each step.
std::vector<Tensor> forward_steps(const std::vector<Tensor>& inputs, const LtcParams& p, SolverKind kind, double dt);

/// Single window (T x input) to its T x hidden state trajectory.
Tensor forward_sequence(const Tensor& window, const LtcParams& p, SolverKind kind, double dt);

inline constexpr double kMinDenominator = 1e-12;

}  // namespace spillnet::ltc
