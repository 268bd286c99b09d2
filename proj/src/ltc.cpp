#include "spillnet/ltc.hpp"

#include <cmath>

#include "spillnet/error.hpp"

namespace spillnet::ltc {

namespace t = spillnet::tensor;

namespace {

void check_shapes(const Tensor& x, const Tensor& u, const LtcParams& p) {
  const std::size_t h = p.hidden();
  if (x.cols() != h || x.rows() != u.rows() || u.cols() != p.input()) {
    throw Error(ErrorCode::ShapeMismatch, "ltc state " + x.shape().str() + ", input " + u.shape().str() +
                                              " for W_x " + p.W_x.shape().str() + ", W_r " + p.W_r.shape().str());
  }
}

Tensor row_expand(const Tensor& v, std::size_t rows) { return t::expand(v, rows, v.cols()); }

/// u W_x^T + b, the part of the pre-activation that is fixed within a step.
Tensor input_term(const Tensor& u, const LtcParams& p) {
  return t::add(t::matmul(u, t::transpose(p.W_x)), row_expand(p.b, u.rows()));
}

Tensor activation_from(const Tensor& x, const Tensor& in, const Tensor& W_rT) {
  return t::tanh(t::add(in, t::matmul(x, W_rT)));
}

Tensor derivative_from(const Tensor& x, const Tensor& in, const Tensor& W_rT, const Tensor& inv_tau) {
  return t::mul(t::sub(activation_from(x, in, W_rT), x), inv_tau);
}

Tensor inv_tau_rows(const LtcParams& p, std::size_t rows) {
  return row_expand(t::exp(t::scale(p.log_tau, -1.0)), rows);
}

Tensor rk4_from(const Tensor& x, const Tensor& in, const Tensor& W_rT, const Tensor& inv_tau, double h) {
  const Tensor k1 = derivative_from(x, in, W_rT, inv_tau);
  const Tensor k2 = derivative_from(t::add(x, t::scale(k1, h / 2.0)), in, W_rT, inv_tau);
  const Tensor k3 = derivative_from(t::add(x, t::scale(k2, h / 2.0)), in, W_rT, inv_tau);
  const Tensor k4 = derivative_from(t::add(x, t::scale(k3, h)), in, W_rT, inv_tau);
  const Tensor s = t::add(t::add(k1, t::scale(k2, 2.0)), t::add(t::scale(k3, 2.0), k4));
  return t::add(x, t::scale(s, h / 6.0));
}

Tensor fused_from(const Tensor& x, const Tensor& in, const Tensor& W_rT, const Tensor& inv_tau, const Tensor& A,
                  double dt) {
  const std::size_t rows = x.rows(), cols = x.cols();
  const Tensor f = activation_from(x, in, W_rT);
  const Tensor dt_eff = t::expand(adaptive_dt(x, dt), rows, cols);
  const Tensor num = t::add(x, t::mul(t::mul(dt_eff, f), A));
  const Tensor den = t::add_scalar(t::mul(dt_eff, t::add(inv_tau, f)), 1.0);
  for (double d : den.data()) {
    if (!(d > kMinDenominator)) {
      throw Error(ErrorCode::NumericalError, "fused step denominator " + std::to_string(d));
    }
  }
  return t::div(num, den);
}

Tensor euler_from(const Tensor& x, const Tensor& in, const Tensor& W_rT, const Tensor& inv_tau, double dt) {
  return t::add(x, t::scale(derivative_from(x, in, W_rT, inv_tau), dt));
}

void check_dt(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw Error(ErrorCode::NumericalError, "step size must be positive, got " + std::to_string(dt));
  }
}

}  // namespace

std::string_view to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::RK4:
      return "rk4";
    case SolverKind::FusedExplicit:
      return "explicit";
    case SolverKind::Euler:
      return "euler";
  }
  return "?";
}

LtcParams init_params(std::size_t input, std::size_t hidden, Rng& rng, bool requires_grad) {
  auto uniform = [&](std::size_t r, std::size_t c, double lim) {
    std::vector<double> v(r * c);
    for (double& e : v) e = rng.uniform(-lim, lim);
    return Tensor::from(r, c, std::move(v), requires_grad);
  };
  LtcParams p;
  p.W_x = uniform(hidden, input, 1.0 / std::sqrt(static_cast<double>(input)));
  p.W_r = uniform(hidden, hidden, 1.0 / std::sqrt(static_cast<double>(hidden)));
  p.b = Tensor::zeros(1, hidden, requires_grad);
  std::vector<double> lt(hidden);
  for (double& e : lt) e = rng.uniform(std::log(0.5), std::log(8.0));
  p.log_tau = Tensor::from(1, hidden, std::move(lt), requires_grad);
  p.A = Tensor::full(1, hidden, 1.0, requires_grad);
  return p;
}

LtcParams constant_params(std::size_t input, std::size_t hidden, double w, double bias, double tau, double amplitude) {
  LtcParams p;
  p.W_x = Tensor::full(hidden, input, w);
  p.W_r = Tensor::full(hidden, hidden, w);
  p.b = Tensor::full(1, hidden, bias);
  p.log_tau = Tensor::full(1, hidden, std::log(tau));
  p.A = Tensor::full(1, hidden, amplitude);
  return p;
}

Tensor activation(const Tensor& x, const Tensor& u, const LtcParams& p) {
  check_shapes(x, u, p);
  return activation_from(x, input_term(u, p), t::transpose(p.W_r));
}

Tensor derivative(const Tensor& x, const Tensor& u, const LtcParams& p) {
  check_shapes(x, u, p);
  return derivative_from(x, input_term(u, p), t::transpose(p.W_r), inv_tau_rows(p, x.rows()));
}

Tensor effective_tau(const Tensor& x, const Tensor& u, const LtcParams& p) {
  const Tensor f = activation(x, u, p);
  const Tensor tau = row_expand(p.tau(), x.rows());
  return t::div(tau, t::add_scalar(t::mul(tau, f), 1.0));
}

Tensor adaptive_dt(const Tensor& x, double dt) {
  return t::div(Tensor::scalar(dt), t::add_scalar(t::row_norm(x), 1.0));
}

Tensor step_fused(const Tensor& x, const Tensor& u, const LtcParams& p, double dt) {
  check_shapes(x, u, p);
  check_dt(dt);
  return fused_from(x, input_term(u, p), t::transpose(p.W_r), inv_tau_rows(p, x.rows()), row_expand(p.A, x.rows()),
                    dt);
}

Tensor step_rk4(const Tensor& x, const Tensor& u, const LtcParams& p, double h) {
  check_shapes(x, u, p);
  check_dt(h);
  return rk4_from(x, input_term(u, p), t::transpose(p.W_r), inv_tau_rows(p, x.rows()), h);
}

Tensor step_euler(const Tensor& x, const Tensor& u, const LtcParams& p, double dt) {
  check_shapes(x, u, p);
  check_dt(dt);
  return euler_from(x, input_term(u, p), t::transpose(p.W_r), inv_tau_rows(p, x.rows()), dt);
}

Tensor step(SolverKind kind, const Tensor& x, const Tensor& u, const LtcParams& p, double dt) {
  switch (kind) {
    case SolverKind::RK4:
      return step_rk4(x, u, p, dt);
    case SolverKind::FusedExplicit:
      return step_fused(x, u, p, dt);
    case SolverKind::Euler:
      return step_euler(x, u, p, dt);
  }
  throw Error(ErrorCode::ConfigError, "unknown solver");
}

std::vector<Tensor> forward_steps(const std::vector<Tensor>& inputs, const LtcParams& p, SolverKind kind, double dt) {
  check_dt(dt);
  std::vector<Tensor> states;
  if (inputs.empty()) return states;
  const std::size_t rows = inputs.front().rows();
  Tensor x = Tensor::zeros(rows, p.hidden());
  const Tensor W_rT = t::transpose(p.W_r);
  const Tensor W_xT = t::transpose(p.W_x);
  const Tensor bias = row_expand(p.b, rows);
  const Tensor inv_tau = inv_tau_rows(p, rows);
  const Tensor A = kind == SolverKind::FusedExplicit ? row_expand(p.A, rows) : Tensor();
  states.reserve(inputs.size());
  for (const Tensor& u : inputs) {
    check_shapes(x, u, p);
    const Tensor in = t::add(t::matmul(u, W_xT), bias);
    switch (kind) {
      case SolverKind::RK4:
        x = rk4_from(x, in, W_rT, inv_tau, dt);
        break;
      case SolverKind::FusedExplicit:
        x = fused_from(x, in, W_rT, inv_tau, A, dt);
        break;
      case SolverKind::Euler:
        x = euler_from(x, in, W_rT, inv_tau, dt);
        break;
    }
    states.push_back(x);
  }
  return states;
}

Tensor forward_sequence(const Tensor& window, const LtcParams& p, SolverKind kind, double dt) {
  std::vector<Tensor> inputs;
  inputs.reserve(window.rows());
  for (std::size_t i = 0; i < window.rows(); ++i) inputs.push_back(t::slice(window, i, i + 1, 0, window.cols()));
  const auto states = forward_steps(inputs, p, kind, dt);
  if (states.empty()) return Tensor::zeros(0, p.hidden());
  return t::concat_rows(std::span<const Tensor>(states));
}

}  // namespace spillnet::ltc
