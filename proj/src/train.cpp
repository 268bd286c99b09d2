#include "spillnet/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include "spillnet/error.hpp"
#include "spillnet/jsonutil.hpp"
#include "spillnet/log.hpp"
#include "spillnet/rng.hpp"

namespace spillnet::train {

namespace t = spillnet::tensor;
using features::FeatureSequence;
using json = nlohmann::json;

TrainConfig TrainConfig::defaults_for(model::CoreKind solver) {
  TrainConfig c;
  c.solver = solver;
  switch (solver) {
    case model::CoreKind::RK4:
      c.alpha = 0.05;
      c.lr = 3e-4;
      c.patience = 15;
      break;
    case model::CoreKind::FusedExplicit:
      c.alpha = 0.1;
      c.lr = 5e-4;
      c.patience = 12;
      break;
    case model::CoreKind::Euler:
      c.alpha = 0.2;
      c.lr = 1e-3;
      c.patience = 10;
      break;
    case model::CoreKind::LstmBaseline:
      c.alpha = 0.1;
      c.lr = 1e-3;
      c.patience = 10;
      break;
  }
  c.model.core = solver;
  return c;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::ConfigError, m); };
  if (alpha < 0.0 || beta < 0.0) fail("alpha and beta must be non-negative");
  if (!(lr >= 0.0)) fail("lr must be non-negative");
  if (max_epochs < 0 || patience < 0) fail("max_epochs and patience must be non-negative");
  if (batch_size == 0) fail("batch_size must be positive");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) fail("val_fraction must lie in (0, 1)");
  model::ModelConfig m = model;
  m.core = solver;
  m.validate();
}

TrainConfig train_config_from_json(std::string_view text, TrainConfig base) {
  const json doc = jsonutil::parse(text);
  jsonutil::check_schema_version(doc);
  TrainConfig c = base;
  if (doc.contains("solver")) {
    const auto solver = model::core_from_string(jsonutil::get_as<std::string>(doc, "", "solver"));
    c = TrainConfig::defaults_for(solver);
    c.seed = base.seed;
    c.model = base.model;
    c.model.core = solver;
  }
  using jsonutil::get_or;
  c.alpha = get_or(doc, "", "alpha", c.alpha);
  c.beta = get_or(doc, "", "beta", c.beta);
  c.lr = get_or(doc, "", "lr", c.lr);
  c.max_epochs = get_or(doc, "", "max_epochs", c.max_epochs);
  c.patience = get_or(doc, "", "patience", c.patience);
  c.batch_size = get_or(doc, "", "batch_size", c.batch_size);
  c.seed = get_or(doc, "", "seed", c.seed);
  c.weight_decay = get_or(doc, "", "weight_decay", c.weight_decay);
  c.min_delta = get_or(doc, "", "min_delta", c.min_delta);
  c.val_fraction = get_or(doc, "", "val_fraction", c.val_fraction);
  c.model.hidden = get_or(doc, "", "hidden", c.model.hidden);
  c.model.heads = get_or(doc, "", "heads", c.model.heads);
  c.model.head_dim = get_or(doc, "", "head_dim", c.model.head_dim);
  c.model.lstm_sizes = get_or(doc, "", "lstm_sizes", c.model.lstm_sizes);
  c.model.core = c.solver;
  c.validate();
  return c;
}

std::string train_config_to_json(const TrainConfig& c) {
  json doc = {{"schema_version", jsonutil::kSchemaVersion},
              {"solver", model::to_string(c.solver)},
              {"alpha", c.alpha},
              {"beta", c.beta},
              {"lr", c.lr},
              {"max_epochs", c.max_epochs},
              {"patience", c.patience},
              {"batch_size", c.batch_size},
              {"seed", c.seed},
              {"weight_decay", c.weight_decay},
              {"min_delta", c.min_delta},
              {"val_fraction", c.val_fraction},
              {"hidden", c.model.hidden},
              {"heads", c.model.heads},
              {"head_dim", c.model.head_dim},
              {"lstm_sizes", c.model.lstm_sizes}};
  return doc.dump(2);
}

LossParts loss_total(const std::vector<Tensor>& pred, const std::vector<Tensor>& target, double alpha, double beta) {
  if (pred.empty() || pred.size() != target.size()) {
    throw Error(ErrorCode::ShapeMismatch, "loss over " + std::to_string(pred.size()) + " predicted and " +
                                              std::to_string(target.size()) + " target horizons");
  }
  const std::size_t K = pred.size();
  const std::size_t B = pred[0].rows(), D = pred[0].cols();
  for (std::size_t k = 0; k < K; ++k) {
    if (pred[k].shape() != target[k].shape() || pred[k].shape() != pred[0].shape()) {
      throw Error(ErrorCode::ShapeMismatch, "prediction " + pred[k].shape().str() + " vs target " +
                                                target[k].shape().str());
    }
  }
  if (D <= features::kAreaRate) {
    throw Error(ErrorCode::ShapeMismatch, "loss needs 28 output dims, got " + pred[0].shape().str());
  }
  Tensor sq_sum, area_sum;
  for (std::size_t k = 0; k < K; ++k) {
    const Tensor diff = t::sub(pred[k], target[k]);
    const Tensor s = t::sum(t::square(diff));
    const Tensor a = t::add(t::sum(t::square(t::slice(diff, 0, B, 0, 1))),
                            t::sum(t::square(t::slice(diff, 0, B, features::kAreaRate, features::kAreaRate + 1))));
    sq_sum = sq_sum.defined() ? t::add(sq_sum, s) : s;
    area_sum = area_sum.defined() ? t::add(area_sum, a) : a;
  }
  const Tensor mse = t::scale(sq_sum, 1.0 / static_cast<double>(K * B * D));
  const Tensor area = t::scale(area_sum, 1.0 / static_cast<double>(K * B * 2));
  Tensor total = t::add(mse, t::scale(area, beta));
  double smooth_value = 0.0;
  if (K > 1) {
    Tensor sm;
    for (std::size_t k = 0; k + 1 < K; ++k) {
      const Tensor s = t::sum(t::square(t::sub(pred[k + 1], pred[k])));
      sm = sm.defined() ? t::add(sm, s) : s;
    }
    const Tensor smooth = t::scale(sm, 1.0 / static_cast<double>((K - 1) * B));
    smooth_value = smooth.item();
    total = t::add(total, t::scale(smooth, alpha));
  }
  return {total, mse.item(), smooth_value, area.item()};
}

void adamw_step(std::span<Tensor> params, AdamState& state, const AdamWConfig& c) {
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), {});
    state.v.assign(params.size(), {});
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.m[i].assign(params[i].size(), 0.0);
      state.v[i].assign(params[i].size(), 0.0);
    }
    state.step = 0;
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto theta = params[i].mutable_data();
    auto grad = params[i].grad();
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t j = 0; j < theta.size(); ++j) {
      const double g = grad.empty() ? 0.0 : grad[j];
      theta[j] -= c.lr * c.weight_decay * theta[j];
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g;
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g * g;
      const double m_hat = m[j] / bc1;
      const double v_hat = v[j] / bc2;
      theta[j] -= c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
    }
  }
}

std::vector<FeatureSequence> complete_windows(std::span<const FeatureSequence> data, const std::vector<int>& horizons) {
  std::vector<FeatureSequence> out;
  for (const auto& s : data) {
    if (std::ranges::all_of(horizons, [&](int h) { return s.horizon_targets.contains(h); })) out.push_back(s);
  }
  return out;
}

Split time_block_split(std::span<const FeatureSequence> data, double val_fraction) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const FeatureSequence*>> groups;
  for (const auto& s : data) {
    auto [it, inserted] = groups.try_emplace(s.spill_id);
    if (inserted) order.push_back(s.spill_id);
    it->second.push_back(&s);
  }
  Split split;
  for (const auto& id : order) {
    auto& g = groups[id];
    std::ranges::stable_sort(g, {}, &FeatureSequence::issue_time);
    const auto n_val = static_cast<std::size_t>(std::floor(val_fraction * static_cast<double>(g.size()) + 0.5));
    const std::size_t n_train = g.size() - std::min(n_val, g.size());
    for (std::size_t i = 0; i < g.size(); ++i) (i < n_train ? split.train : split.validation).push_back(*g[i]);
  }
  if (split.validation.empty() && split.train.size() > 1) {
    split.validation.push_back(split.train.back());
    split.train.pop_back();
  }
  return split;
}

Batchable prepare(std::span<const FeatureSequence> data, const features::TargetScaling& scaling,
                  const std::vector<int>& horizons) {
  Batchable b;
  b.targets.resize(horizons.size());
  for (const auto& s : data) {
    std::vector<double> flat;
    flat.reserve(features::kWindowLength * features::kFeatureDim);
    for (const auto& row : s.window) {
      const auto z = scaling.normalize_input(row);
      flat.insert(flat.end(), z.begin(), z.end());
    }
    b.inputs.push_back(std::move(flat));
    for (std::size_t k = 0; k < horizons.size(); ++k) {
      b.targets[k].push_back(scaling.normalize_target(s.horizon_targets.at(horizons[k])));
    }
  }
  return b;
}

namespace {

std::vector<Tensor> gather_targets(const Batchable& data, std::span<const std::size_t> idx) {
  std::vector<Tensor> out;
  for (const auto& per_h : data.targets) {
    const std::size_t D = per_h.front().size();
    std::vector<double> v;
    v.reserve(idx.size() * D);
    for (std::size_t i : idx) v.insert(v.end(), per_h[i].begin(), per_h[i].end());
    out.push_back(Tensor::from(idx.size(), D, std::move(v)));
  }
  return out;
}

std::vector<Tensor> gather_inputs(const Batchable& data, std::span<const std::size_t> idx, std::size_t input) {
  std::vector<std::vector<double>> windows;
  windows.reserve(idx.size());
  for (std::size_t i : idx) windows.push_back(data.inputs[i]);
  return model::batch_steps(windows, windows.front().size() / input, input);
}

void check_finite(double v, int epoch, const char* what) {
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::NumericalError, std::string(what) + " is not finite at epoch " + std::to_string(epoch));
  }
}

}  // namespace

LossParts evaluate_loss(const model::Model& m, const Batchable& data, double alpha, double beta,
                        std::size_t batch_size) {
  const std::size_t n = data.inputs.size();
  if (n == 0) throw Error(ErrorCode::EmptyDataset, "no samples to evaluate");
  double total = 0.0, mse = 0.0, smooth = 0.0, area = 0.0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < n; start += batch_size) {
    idx.resize(std::min(batch_size, n - start));
    std::iota(idx.begin(), idx.end(), start);
    const auto out = m.forward(gather_inputs(data, idx, m.config().input_dim));
    const auto parts = loss_total(out.mean, gather_targets(data, idx), alpha, beta);
    const double w = static_cast<double>(idx.size());
    total += w * parts.total.item();
    mse += w * parts.mse;
    smooth += w * parts.smooth;
    area += w * parts.area;
  }
  const double N = static_cast<double>(n);
  return {Tensor::scalar(total / N), mse / N, smooth / N, area / N};
}

TrainResult train_model(std::span<const FeatureSequence> dataset, const TrainConfig& config) {
  config.validate();
  model::ModelConfig mc = config.model;
  mc.core = config.solver;
  const auto usable = complete_windows(dataset, mc.horizons);
  if (usable.size() < 2) {
    throw Error(ErrorCode::EmptyDataset, "need at least two windows with targets for every horizon, got " +
                                             std::to_string(usable.size()));
  }
  const Split split = time_block_split(usable, config.val_fraction);
  if (split.train.empty() || split.validation.empty()) throw Error(ErrorCode::EmptyDataset, "empty split");

  const auto scaling = features::fit_target_scaling(split.train);
  const Batchable train_set = prepare(split.train, scaling, mc.horizons);
  const Batchable val_set = prepare(split.validation, scaling, mc.horizons);

  model::Model net(mc, derive_seed(config.seed, 1));
  net.set_requires_grad(true);
  std::vector<Tensor> params;
  for (const auto& p : net.params()) params.push_back(p.value);

  TrainResult result{net.clone(), scaling, {}, 0, 0.0, false};
  const auto initial_train = evaluate_loss(net, train_set, config.alpha, config.beta, config.batch_size);
  const auto initial_val = evaluate_loss(net, val_set, config.alpha, config.beta, config.batch_size);
  check_finite(initial_val.total.item(), 0, "validation loss");
  result.history.push_back({0, initial_train.total.item(), initial_val.total.item(), config.lr, initial_val.mse});
  result.best_val_loss = initial_val.total.item();

  Rng shuffle_rng(derive_seed(config.seed, 2));
  AdamState adam;
  const AdamWConfig opt{config.lr, config.beta1, config.beta2, config.eps, config.weight_decay};
  std::vector<std::size_t> order(train_set.inputs.size());
  std::iota(order.begin(), order.end(), 0);
  std::uint64_t step = 0;
  int stale = 0;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double train_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::span<const std::size_t> idx(order.data() + start, std::min(config.batch_size, order.size() - start));
      net.zero_grad();
      t::Tape tape;
      LossParts parts;
      {
        t::TapeScope scope(tape);
        const auto out = net.forward(gather_inputs(train_set, idx, mc.input_dim), true,
                                     derive_seed(config.seed, 1000 + step++));
        parts = loss_total(out.mean, gather_targets(train_set, idx), config.alpha, config.beta);
      }
      check_finite(parts.total.item(), epoch, "training loss");
      t::backward(tape, parts.total);
      adamw_step(params, adam, opt);
      train_sum += parts.total.item() * static_cast<double>(idx.size());
    }
    const auto val = evaluate_loss(net, val_set, config.alpha, config.beta, config.batch_size);
    const double val_loss = val.total.item();
    check_finite(val_loss, epoch, "validation loss");
    result.history.push_back(
        {epoch, train_sum / static_cast<double>(order.size()), val_loss, config.lr, val.mse});
    log::debug("epoch " + std::to_string(epoch) + " val " + std::to_string(val_loss));
    if (val_loss <= result.best_val_loss - config.min_delta) {
      result.best_val_loss = val_loss;
      result.best_epoch = epoch;
      result.model.copy_values_from(net);
      stale = 0;
    } else if (++stale > config.patience) {
      result.stopped_early = true;
      break;
    }
  }
  return result;
}

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::string out = "epoch,train_loss,val_loss,lr,val_mse\n";
  char buf[160];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", r.epoch, r.train_loss, r.val_loss, r.lr, r.val_mse);
    out += buf;
  }
  return out;
}

}  // namespace spillnet::train
