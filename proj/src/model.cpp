#include "spillnet/model.hpp"

#include <algorithm>
#include <cmath>

#include "spillnet/error.hpp"
#include "spillnet/rng.hpp"

namespace spillnet::model {

namespace t = spillnet::tensor;

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

Tensor init_value(const ParamSpec& spec, Rng& rng) {
  const std::string_view n = spec.name;
  const auto [rows, cols] = spec.shape;
  if (ends_with(n, ".log_tau")) {
    std::vector<double> v(rows * cols);
    for (double& e : v) e = rng.uniform(std::log(0.5), std::log(8.0));
    return Tensor::from(rows, cols, std::move(v));
  }
  if (ends_with(n, ".A") || ends_with(n, ".gamma")) return Tensor::full(rows, cols, 1.0);
  if (starts_with(n, "lstm.") && ends_with(n, ".b_f")) return Tensor::full(rows, cols, 1.0);
  if (rows == 1) return Tensor::zeros(rows, cols);
  const std::size_t fan_in = starts_with(n, "attn.") ? rows : cols;
  const double lim = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<double> v(rows * cols);
  for (double& e : v) e = rng.uniform(-lim, lim);
  return Tensor::from(rows, cols, std::move(v));
}

Tensor linear(const Tensor& x, const Tensor& W, const Tensor& b) {
  return t::add(t::matmul(x, t::transpose(W)), t::expand(b, x.rows(), b.cols()));
}

/// Attention output for the final query row of every batch element.
Tensor final_attention(const std::vector<Tensor>& states, const AttentionParams& p, std::size_t heads,
                       std::size_t head_dim) {
  const std::size_t T = states.size();
  const std::size_t B = states.back().rows();
  const Tensor all = t::concat_rows(std::span<const Tensor>(states));
  const Tensor Q = t::matmul(states.back(), p.W_Q);
  const Tensor K = t::matmul(all, p.W_K);
  const Tensor V = t::matmul(all, p.W_V);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(head_dim));
  std::vector<Tensor> head_out;
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t c0 = h * head_dim, c1 = c0 + head_dim;
    const Tensor q = t::slice(Q, 0, B, c0, c1);
    std::vector<Tensor> scores;
    for (std::size_t s = 0; s < T; ++s) scores.push_back(t::row_sum(t::mul(q, t::slice(K, s * B, (s + 1) * B, c0, c1))));
    const Tensor w = t::rowwise_softmax(t::scale(t::concat_cols(std::span<const Tensor>(scores)), inv_sqrt_d));
    Tensor acc;
    for (std::size_t s = 0; s < T; ++s) {
      const Tensor term = t::mul(t::expand(t::slice(w, 0, B, s, s + 1), B, head_dim), t::slice(V, s * B, (s + 1) * B, c0, c1));
      acc = acc.defined() ? t::add(acc, term) : term;
    }
    head_out.push_back(acc);
  }
  return t::add(t::matmul(t::concat_cols(std::span<const Tensor>(head_out)), p.W_O), states.back());
}

}  // namespace

std::string_view to_string(CoreKind core) {
  switch (core) {
    case CoreKind::RK4:
      return "rk4";
    case CoreKind::FusedExplicit:
      return "explicit";
    case CoreKind::Euler:
      return "euler";
    case CoreKind::LstmBaseline:
      return "lstm";
  }
  return "?";
}

CoreKind core_from_string(std::string_view text) {
  if (text == "rk4") return CoreKind::RK4;
  if (text == "explicit") return CoreKind::FusedExplicit;
  if (text == "euler") return CoreKind::Euler;
  if (text == "lstm") return CoreKind::LstmBaseline;
  throw Error(ErrorCode::ConfigError, "unknown solver '" + std::string(text) + "'");
}

std::string_view display_name(CoreKind core) {
  switch (core) {
    case CoreKind::RK4:
      return "LTC RK4";
    case CoreKind::FusedExplicit:
      return "LTC Explicit";
    case CoreKind::Euler:
      return "LTC Euler";
    case CoreKind::LstmBaseline:
      return "LSTM";
  }
  return "?";
}

std::optional<ltc::SolverKind> solver_of(CoreKind core) {
  switch (core) {
    case CoreKind::RK4:
      return ltc::SolverKind::RK4;
    case CoreKind::FusedExplicit:
      return ltc::SolverKind::FusedExplicit;
    case CoreKind::Euler:
      return ltc::SolverKind::Euler;
    case CoreKind::LstmBaseline:
      return std::nullopt;
  }
  return std::nullopt;
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::ConfigError, m); };
  if (input_dim == 0 || hidden == 0 || output_dim == 0 || window == 0) fail("model sizes must be positive");
  if (heads == 0 || heads * head_dim != hidden) {
    fail("heads * head_dim (" + std::to_string(heads * head_dim) + ") must equal hidden (" + std::to_string(hidden) +
         ")");
  }
  if (horizons.empty()) fail("at least one horizon required");
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (horizons[i] <= 0 || (i > 0 && horizons[i] <= horizons[i - 1])) fail("horizons must be positive and increasing");
  }
  if (core == CoreKind::LstmBaseline && (lstm_sizes.empty() || std::ranges::count(lstm_sizes, 0u) > 0)) {
    fail("lstm layer sizes must be positive");
  }
  if (!(dt > 0.0)) fail("dt must be positive");
}

ModelConfig ModelConfig::miniature(CoreKind core) {
  ModelConfig c;
  c.core = core;
  c.hidden = 8;
  c.heads = 1;
  c.head_dim = 8;
  c.horizons = {3, 7};
  c.lstm_sizes = {8, 4};
  c.window = 4;
  return c;
}

std::vector<ParamSpec> parameter_layout(const ModelConfig& c) {
  c.validate();
  std::vector<ParamSpec> out;
  const std::size_t H = c.hidden;
  std::size_t core_out = H;
  if (c.core == CoreKind::LstmBaseline) {
    std::size_t in = c.input_dim;
    for (std::size_t l = 0; l < c.lstm_sizes.size(); ++l) {
      const std::size_t h = c.lstm_sizes[l];
      const std::string p = "lstm." + std::to_string(l) + ".";
      for (const char* g : {"W_f", "W_i", "W_C", "W_o"}) out.push_back({p + g, {h, h + in}});
      for (const char* g : {"b_f", "b_i", "b_C", "b_o"}) out.push_back({p + g, {1, h}});
      in = h;
    }
    core_out = in;
  } else {
    out.push_back({"proj.W", {H, c.input_dim}});
    out.push_back({"proj.b", {1, H}});
    out.push_back({"proj.gamma", {1, H}});
    out.push_back({"proj.beta", {1, H}});
    out.push_back({"ltc.W_x", {H, H}});
    out.push_back({"ltc.W_r", {H, H}});
    out.push_back({"ltc.b", {1, H}});
    out.push_back({"ltc.log_tau", {1, H}});
    out.push_back({"ltc.A", {1, H}});
    const std::size_t hd = c.heads * c.head_dim;
    out.push_back({"attn.W_Q", {H, hd}});
    out.push_back({"attn.W_K", {H, hd}});
    out.push_back({"attn.W_V", {H, hd}});
    out.push_back({"attn.W_O", {hd, H}});
  }
  out.push_back({"trunk.W", {H, core_out}});
  out.push_back({"trunk.b", {1, H}});
  for (int h : c.horizons) {
    const std::string p = "head." + std::to_string(h) + ".";
    out.push_back({p + "mean.W", {c.output_dim, H}});
    out.push_back({p + "mean.b", {1, c.output_dim}});
    out.push_back({p + "unc.W", {c.output_dim, H}});
    out.push_back({p + "unc.b", {1, c.output_dim}});
  }
  return out;
}

Tensor attention_weights(const Tensor& states, const AttentionParams& p, std::size_t heads, std::size_t head) {
  const std::size_t hd = p.W_Q.cols() / heads;
  if (states.cols() != p.W_Q.rows() || head >= heads) {
    throw Error(ErrorCode::ShapeMismatch, "attention states " + states.shape().str() + " vs W_Q " + p.W_Q.shape().str());
  }
  const std::size_t T = states.rows();
  const Tensor q = t::slice(t::matmul(states, p.W_Q), 0, T, head * hd, (head + 1) * hd);
  const Tensor k = t::slice(t::matmul(states, p.W_K), 0, T, head * hd, (head + 1) * hd);
  return t::rowwise_softmax(t::scale(t::matmul(q, t::transpose(k)), 1.0 / std::sqrt(static_cast<double>(hd))));
}

Tensor attention(const Tensor& states, const AttentionParams& p, std::size_t heads) {
  if (states.cols() != p.W_Q.rows() || p.W_O.cols() != states.cols() || heads == 0 || p.W_Q.cols() % heads != 0) {
    throw Error(ErrorCode::ShapeMismatch, "attention states " + states.shape().str() + " vs W_Q " +
                                              p.W_Q.shape().str() + ", W_O " + p.W_O.shape().str());
  }
  const std::size_t hd = p.W_Q.cols() / heads;
  const std::size_t T = states.rows();
  const Tensor V = t::matmul(states, p.W_V);
  std::vector<Tensor> outs;
  for (std::size_t h = 0; h < heads; ++h) {
    outs.push_back(t::matmul(attention_weights(states, p, heads, h), t::slice(V, 0, T, h * hd, (h + 1) * hd)));
  }
  return t::add(t::matmul(t::concat_cols(std::span<const Tensor>(outs)), p.W_O), states);
}

const HorizonPrediction& PredictionSet::at(int horizon) const {
  for (const auto& h : horizons) {
    if (h.horizon == horizon) return h;
  }
  throw Error(ErrorCode::AlignmentError, "no prediction for horizon " + std::to_string(horizon));
}

Model::Model(ModelConfig config, std::uint64_t seed) : config_(std::move(config)) {
  Rng rng(derive_seed(seed, 0x6d6f64656cULL));
  for (const auto& spec : parameter_layout(config_)) params_.push_back({spec.name, init_value(spec, rng)});
}

Model::Model(ModelConfig config, std::vector<NamedParam> params) : config_(std::move(config)) {
  const auto layout = parameter_layout(config_);
  if (params.size() != layout.size()) {
    throw Error(ErrorCode::SchemaError, "expected " + std::to_string(layout.size()) + " parameter tensors, got " +
                                            std::to_string(params.size()));
  }
  for (const auto& spec : layout) {
    auto it = std::ranges::find_if(params, [&](const NamedParam& p) { return p.name == spec.name; });
    if (it == params.end()) throw Error(ErrorCode::SchemaError, "missing parameter " + spec.name);
    if (!it->value.defined() || it->value.shape() != spec.shape) {
      throw Error(ErrorCode::ShapeMismatch, "parameter " + spec.name + " has shape " +
                                                (it->value.defined() ? it->value.shape().str() : "(none)") +
                                                ", expected " + spec.shape.str());
    }
    params_.push_back({spec.name, it->value});
  }
}

const Tensor& Model::param(std::string_view name) const {
  for (const auto& p : params_) {
    if (p.name == name) return p.value;
  }
  throw Error(ErrorCode::SchemaError, "no parameter named " + std::string(name));
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void Model::set_requires_grad(bool on) {
  for (auto& p : params_) p.value.node()->requires_grad = on;
}

void Model::zero_grad() {
  for (auto& p : params_) p.value.zero_grad();
}

Model Model::clone() const {
  std::vector<NamedParam> copy;
  for (const auto& p : params_) copy.push_back({p.name, p.value.detach()});
  return Model(config_, std::move(copy));
}

void Model::copy_values_from(const Model& other) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto dst = params_[i].value.mutable_data();
    auto src = other.params_.at(i).value.data();
    std::copy(src.begin(), src.end(), dst.begin());
  }
}

ltc::LtcParams Model::ltc_params() const {
  return {param("ltc.W_x"), param("ltc.W_r"), param("ltc.b"), param("ltc.log_tau"), param("ltc.A")};
}

lstm::LstmParams Model::lstm_params() const {
  lstm::LstmParams lp;
  lp.dropout_p = lstm::kDropout;
  for (std::size_t l = 0; l < config_.lstm_sizes.size(); ++l) {
    const std::string p = "lstm." + std::to_string(l) + ".";
    lp.layers.push_back({param(p + "W_f"), param(p + "W_i"), param(p + "W_C"), param(p + "W_o"), param(p + "b_f"),
                         param(p + "b_i"), param(p + "b_C"), param(p + "b_o")});
  }
  return lp;
}

AttentionParams Model::attention_params() const {
  return {param("attn.W_Q"), param("attn.W_K"), param("attn.W_V"), param("attn.W_O")};
}

Tensor Model::encode(const std::vector<Tensor>& steps, bool training, std::uint64_t seed) const {
  if (steps.empty()) throw Error(ErrorCode::ShapeMismatch, "empty input window");
  for (const auto& s : steps) {
    if (s.cols() != config_.input_dim || s.rows() != steps.front().rows()) {
      throw Error(ErrorCode::ShapeMismatch, "window step " + s.shape().str() + ", expected batch x " +
                                                std::to_string(config_.input_dim));
    }
  }
  if (config_.core == CoreKind::LstmBaseline) return lstm::forward_steps(steps, lstm_params(), training, seed).back();

  const std::size_t B = steps.front().rows();
  const std::size_t T = steps.size();
  const std::size_t H = config_.hidden;
  const Tensor X = t::concat_rows(std::span<const Tensor>(steps));
  Tensor P = t::layer_norm(t::relu(linear(X, param("proj.W"), param("proj.b"))));
  P = t::add(t::mul(P, t::expand(param("proj.gamma"), T * B, H)), t::expand(param("proj.beta"), T * B, H));
  std::vector<Tensor> inputs;
  inputs.reserve(T);
  for (std::size_t s = 0; s < T; ++s) inputs.push_back(t::slice(P, s * B, (s + 1) * B, 0, H));
  const auto states = ltc::forward_steps(inputs, ltc_params(), *solver_of(config_.core), config_.dt);
  return final_attention(states, attention_params(), config_.heads, config_.head_dim);
}

ForwardResult Model::forward(const std::vector<Tensor>& steps, bool training, std::uint64_t seed) const {
  const Tensor z = encode(steps, training, seed);
  const Tensor trunk = t::tanh(linear(z, param("trunk.W"), param("trunk.b")));
  ForwardResult out;
  for (int h : config_.horizons) {
    const std::string p = "head." + std::to_string(h) + ".";
    out.mean.push_back(linear(trunk, param(p + "mean.W"), param(p + "mean.b")));
    out.uncertainty.push_back(t::softplus(linear(trunk, param(p + "unc.W"), param(p + "unc.b"))));
  }
  return out;
}

PredictionSet Model::predict(const Tensor& window) const {
  std::vector<double> flat(window.data().begin(), window.data().end());
  return predict_batch(std::span<const std::vector<double>>(&flat, 1)).front();
}

std::vector<PredictionSet> Model::predict_batch(std::span<const std::vector<double>> windows) const {
  std::vector<PredictionSet> out(windows.size());
  if (windows.empty()) return out;
  const std::size_t T = windows.front().size() / config_.input_dim;
  const auto result = forward(batch_steps(windows, T, config_.input_dim));
  for (std::size_t k = 0; k < config_.horizons.size(); ++k) {
    const std::size_t D = config_.output_dim;
    for (std::size_t b = 0; b < windows.size(); ++b) {
      HorizonPrediction hp;
      hp.horizon = config_.horizons[k];
      auto m = result.mean[k].data().subspan(b * D, D);
      auto u = result.uncertainty[k].data().subspan(b * D, D);
      hp.mean.assign(m.begin(), m.end());
      hp.uncertainty.assign(u.begin(), u.end());
      for (double v : hp.mean) {
        if (!std::isfinite(v)) throw Error(ErrorCode::NumericalError, "non-finite prediction");
      }
      out[b].horizons.push_back(std::move(hp));
    }
  }
  return out;
}

std::vector<Tensor> batch_steps(std::span<const std::vector<double>> windows, std::size_t steps, std::size_t input) {
  const std::size_t B = windows.size();
  std::vector<Tensor> out;
  out.reserve(steps);
  for (const auto& w : windows) {
    if (w.size() != steps * input) {
      throw Error(ErrorCode::ShapeMismatch, "window of " + std::to_string(w.size()) + " values, expected " +
                                                std::to_string(steps) + "x" + std::to_string(input));
    }
  }
  for (std::size_t s = 0; s < steps; ++s) {
    std::vector<double> v(B * input);
    for (std::size_t b = 0; b < B; ++b) std::copy_n(windows[b].data() + s * input, input, v.data() + b * input);
    out.push_back(Tensor::from(B, input, std::move(v)));
  }
  return out;
}

}  // namespace spillnet::model
