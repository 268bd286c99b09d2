#include <gtest/gtest.h>

#include <cmath>

#include "gradcheck.hpp"
#include "spillnet/checkpoint.hpp"
#include "spillnet/error.hpp"
#include "spillnet/model.hpp"

using namespace spillnet;
using namespace spillnet::model;
using spillnet::testing::gradcheck;

namespace {

const CoreKind kCores[] = {CoreKind::RK4, CoreKind::FusedExplicit, CoreKind::Euler, CoreKind::LstmBaseline};

std::vector<std::vector<double>> random_windows(const ModelConfig& c, std::size_t n, Rng& rng) {
  std::vector<std::vector<double>> w(n, std::vector<double>(c.window * c.input_dim));
  for (auto& row : w)
    for (auto& x : row) x = rng.uniform(-1.5, 1.5);
  return w;
}

}  // namespace

TEST(Model, LayoutMatchesParameters) {
  for (auto core : kCores) {
    const Model m(ModelConfig::miniature(core), 1);
    const auto layout = parameter_layout(m.config());
    ASSERT_EQ(layout.size(), m.params().size());
    std::size_t total = 0;
    for (std::size_t i = 0; i < layout.size(); ++i) {
      EXPECT_EQ(layout[i].name, m.params()[i].name);
      EXPECT_EQ(layout[i].shape, m.params()[i].value.shape());
      total += layout[i].shape.size();
    }
    EXPECT_EQ(total, m.parameter_count());
  }
}

TEST(Model, CoreNamesRoundTrip) {
  for (auto core : kCores) EXPECT_EQ(core_from_string(to_string(core)), core);
  EXPECT_THROW(core_from_string("gru"), Error);
}

TEST(Model, AttentionWeightsAreRowStochastic) {
  Rng rng(3);
  ModelConfig c = ModelConfig::miniature(CoreKind::RK4);
  c.heads = 2;
  c.head_dim = 4;
  const Model m(c, 2);
  std::vector<double> v(6 * c.hidden);
  for (auto& x : v) x = rng.uniform(-1, 1);
  const auto states = tensor::Tensor::from(6, c.hidden, v);
  for (std::size_t h = 0; h < 2; ++h) {
    const auto w = attention_weights(states, m.attention_params(), 2, h);
    for (std::size_t r = 0; r < 6; ++r) {
      double s = 0;
      for (std::size_t col = 0; col < 6; ++col) {
        EXPECT_GE(w.at(r, col), 0.0);
        s += w.at(r, col);
      }
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
}

TEST(Model, PredictionsCoverEveryHorizonWithPositiveUncertainty) {
  Rng rng(5);
  for (auto core : kCores) {
    const Model m(ModelConfig::miniature(core), 7);
    const auto windows = random_windows(m.config(), 3, rng);
    const auto preds = m.predict_batch(windows);
    ASSERT_EQ(preds.size(), 3u);
    for (const auto& p : preds) {
      ASSERT_EQ(p.horizons.size(), 2u);
      for (int h : {3, 7}) {
        EXPECT_EQ(p.at(h).mean.size(), 28u);
        for (double u : p.at(h).uncertainty) EXPECT_GT(u, 0.0);
      }
    }
    // batch results agree with one-at-a-time prediction
    const auto single = m.predict_batch(std::span(windows).subspan(1, 1));
    for (std::size_t i = 0; i < 28; ++i) EXPECT_NEAR(single[0].at(7).mean[i], preds[1].at(7).mean[i], 1e-12);
  }
}

TEST(Model, SeedsAreDeterministic) {
  const Model a(ModelConfig::miniature(CoreKind::Euler), 42);
  const Model b(ModelConfig::miniature(CoreKind::Euler), 42);
  const Model c(ModelConfig::miniature(CoreKind::Euler), 43);
  bool differs = false;
  for (std::size_t i = 0; i < a.params().size(); ++i) {
    const auto x = a.params()[i].value.data(), y = b.params()[i].value.data(), z = c.params()[i].value.data();
    EXPECT_TRUE(std::equal(x.begin(), x.end(), y.begin()));
    differs = differs || !std::equal(x.begin(), x.end(), z.begin());
  }
  EXPECT_TRUE(differs);
}

TEST(Model, RejectsInconsistentConfig) {
  ModelConfig c = ModelConfig::miniature(CoreKind::RK4);
  c.head_dim = 3;
  EXPECT_THROW(c.validate(), Error);
  c = ModelConfig::miniature(CoreKind::RK4);
  c.horizons.clear();
  EXPECT_THROW(c.validate(), Error);
}

TEST(Checkpoint, RoundTripIsExact) {
  for (auto core : kCores) {
    const Model m(ModelConfig::miniature(core), 9);
    features::TargetScaling s;
    s.features = {std::vector<double>(25, 0.1), std::vector<double>(25, 2.0 / 3.0)};
    s.aux = {{1.0 / 7.0, -2.0, 3.0}, {1.0, 0.5, 1e-3}};
    const auto text = checkpoint::to_json(m, s, features::ScaleClass::Medium);
    const auto back = checkpoint::from_json(text);
    EXPECT_EQ(back.scale, features::ScaleClass::Medium);
    EXPECT_EQ(back.scaling.features.sigma, s.features.sigma);
    EXPECT_EQ(back.scaling.aux.mu, s.aux.mu);
    ASSERT_EQ(back.model.params().size(), m.params().size());
    for (std::size_t i = 0; i < m.params().size(); ++i) {
      const auto x = m.params()[i].value.data(), y = back.model.params()[i].value.data();
      EXPECT_TRUE(std::equal(x.begin(), x.end(), y.begin(), y.end())) << m.params()[i].name;
    }
    EXPECT_EQ(checkpoint::to_json(back.model, back.scaling, back.scale), text);
  }
}

TEST(Checkpoint, RejectsShapeTampering) {
  const Model m(ModelConfig::miniature(CoreKind::RK4), 1);
  features::TargetScaling s{{std::vector<double>(25, 0.0), std::vector<double>(25, 1.0)}, {{0, 0, 0}, {1, 1, 1}}};
  auto j = nlohmann::json::parse(checkpoint::to_json(m, s, features::ScaleClass::Short));
  j["config"]["hidden"] = 9;
  EXPECT_THROW(checkpoint::from_json(j.dump()), Error);
}

TEST(ModelGrad, MiniatureEveryCore) {
  for (auto core : kCores) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      Rng rng(seed * 17);
      Model m(ModelConfig::miniature(core), seed);
      m.set_requires_grad(true);
      const auto windows = random_windows(m.config(), 2, rng);
      const auto steps = batch_steps(windows, m.config().window, m.config().input_dim);
      std::vector<tensor::Tensor> probes;
      for (int k = 0; k < 4; ++k) {
        std::vector<double> w(2 * 28);
        for (auto& x : w) x = rng.uniform(-1, 1);
        probes.push_back(tensor::Tensor::from(2, 28, w));
      }
      auto loss = [&] {
        const auto out = m.forward(steps);
        tensor::Tensor total = tensor::Tensor::scalar(0.0);
        for (std::size_t k = 0; k < 2; ++k) {
          total = tensor::add(total, tensor::sum(tensor::mul(out.mean[k], probes[k])));
          total = tensor::add(total, tensor::sum(tensor::mul(out.uncertainty[k], probes[2 + k])));
        }
        return total;
      };
      std::vector<std::pair<std::string, tensor::Tensor>> params;
      for (const auto& p : m.params()) params.emplace_back(p.name, p.value);
      const auto r = gradcheck(params, loss);
      EXPECT_LT(r.rel_error, 1e-4) << display_name(core) << " seed " << seed << " at " << r.where << " analytic "
                                   << r.analytic << " numeric " << r.numeric;
    }
  }
}
