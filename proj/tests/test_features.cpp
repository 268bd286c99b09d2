#include <gtest/gtest.h>

#include <cmath>

#include "spillnet/dataset.hpp"
#include "spillnet/error.hpp"
#include "spillnet/features.hpp"
#include "spillnet/scenario.hpp"

using namespace spillnet;
using namespace spillnet::features;

namespace {

ingest::SpillObservation square_obs(UtcSeconds t) {
  return {t, geo::GeoPolygon({{0, 0}, {0.1, 0}, {0.1, 0.1}, {0, 0.1}}), "t", "sq"};
}

std::vector<TimedFeatures> hourly_series(int n, double area0 = 10.0, double slope = 2.0) {
  std::vector<TimedFeatures> s;
  for (int i = 0; i < n; ++i) {
    TimedFeatures f;
    f.time = 1262304000 + i * 3600;
    f.x.fill(1.0);
    f.x[kArea] = area0 + slope * i;
    f.x[kHoursSinceStart] = i;
    s.push_back(f);
  }
  return s;
}

}  // namespace

TEST(Features, MidnightJanFirstAtStart) {
  const UtcSeconds t0 = 1262304000;  // 2010-01-01T00:00:00Z
  const auto x = extract_features(square_obs(t0), EnvSample{}, t0);
  EXPECT_EQ(x[kHoursSinceStart], 0.0);
  EXPECT_NEAR(x[kHourSin], 0.0, 1e-12);
  EXPECT_NEAR(x[kHourCos], 1.0, 1e-12);
  EXPECT_EQ(x[kWindU], 0.0);
  EXPECT_EQ(x[kWindV], 0.0);
  EXPECT_EQ(x[kWindSpeed], 0.0);
  EXPECT_NEAR(x[kArea], 123.64, 123.64e-3);
  EXPECT_NEAR(x[kCompactness], 0.7854, 1e-3);
}

TEST(Features, TrigAndHypotInvariants) {
  const UtcSeconds t0 = 1271894400;
  EnvSample env{3.0, -4.0, 0.3, 0.4, 27.0, 1.2, t0};
  for (int h = 0; h < 50; h += 7) {
    const auto x = extract_features(square_obs(t0 + h * 3600 + 123), env, t0);
    EXPECT_NEAR(x[kHourSin] * x[kHourSin] + x[kHourCos] * x[kHourCos], 1.0, 1e-9);
    EXPECT_NEAR(x[kDaySin] * x[kDaySin] + x[kDayCos] * x[kDayCos], 1.0, 1e-9);
    EXPECT_NEAR(x[kWindSpeed], std::hypot(x[kWindU], x[kWindV]), 1e-9);
    EXPECT_NEAR(x[kCurrentSpeed], std::hypot(x[kCurrentU], x[kCurrentV]), 1e-9);
    for (double v : x) EXPECT_TRUE(std::isfinite(v));
  }
}

TEST(Normalizer, ConstantComponentsGetUnitSigma) {
  std::vector<FeatureVector> rows(4);
  for (auto& r : rows) r.fill(3.5);
  const auto n = fit_normalizer(rows);
  for (double s : n.sigma) EXPECT_EQ(s, 1.0);
}

TEST(Normalizer, PopulationStd) {
  std::vector<std::vector<double>> rows{{0.0}, {2.0}};
  const auto n = fit_normalizer(rows);
  EXPECT_DOUBLE_EQ(n.mu[0], 1.0);
  EXPECT_DOUBLE_EQ(n.sigma[0], 1.0);
  std::vector<std::vector<double>> none;
  EXPECT_THROW(fit_normalizer(none), Error);
}

TEST(Normalizer, ClipAndRoundTrip) {
  Normalizer n{{1.0, -2.0}, {2.0, 0.5}};
  const std::vector<double> at_mu{1.0, -2.0};
  EXPECT_EQ(n.normalize(at_mu), (std::vector<double>{0.0, 0.0}));
  const std::vector<double> far{1.0 + 5 * 2.0, -2.0 + 0.5};
  const auto z = n.normalize(far);
  EXPECT_EQ(z[0], 3.0);
  EXPECT_DOUBLE_EQ(z[1], 1.0);
  const std::vector<double> inside{2.3, -2.9};
  const auto back = n.denormalize(n.normalize(inside));
  EXPECT_NEAR(back[0], inside[0], 1e-9);
  EXPECT_NEAR(back[1], inside[1], 1e-9);
}

TEST(Sequences, SlidingWindowCount) {
  const auto seqs = build_sequences(hourly_series(20), ScaleClass::Short, "a");
  EXPECT_EQ(seqs.size(), 5u);
  for (const auto& s : seqs) EXPECT_EQ(s.window.size(), kWindowLength);
}

TEST(Sequences, ShortSeriesIsTrendPadded) {
  const auto seqs = build_sequences(hourly_series(10, 10.0, 2.0), ScaleClass::Short, "a");
  ASSERT_EQ(seqs.size(), 1u);
  const auto& w = seqs[0].window;
  // six padded steps continue the slope of points 1 -> 2
  for (std::size_t t = 0; t < kWindowLength; ++t) {
    EXPECT_NEAR(w[t][kArea], 10.0 + 2.0 * (static_cast<double>(t) - 6.0), 1e-9) << t;
  }
}

TEST(Sequences, SinglePointIsInsufficient) {
  try {
    build_sequences(hourly_series(1), ScaleClass::Short);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientData);
  }
}

TEST(Sequences, TargetsAtHorizons) {
  const auto seqs = build_sequences(hourly_series(48), ScaleClass::Short, "a");
  ASSERT_FALSE(seqs.empty());
  const auto& first = seqs.front();
  for (int h : kHorizons) {
    ASSERT_TRUE(first.horizon_targets.contains(h));
    EXPECT_NEAR(first.horizon_targets.at(h)[kArea], 10.0 + 2.0 * (15 + h), 1e-9);
    EXPECT_NEAR(first.horizon_targets.at(h)[kAreaRate], 2.0, 1e-9);
  }
}

TEST(Scenario, DispersalHalfLife) {
  scenario::ScenarioConfig c;
  c.kind = 5;
  c.duration_h = 240;
  c.step_h = 24;
  c.params.area0_km2 = 780.0;
  c.params.half_life_h = 240.0;
  const auto frames = scenario::generate_scenario(c);
  EXPECT_NEAR(geo::area_km2(frames.back().observation.boundary), 390.0, 390.0 * 5e-3);
  EXPECT_EQ(frames.back().observation.boundary.exterior().size(), 64u);
}

TEST(Scenario, ZeroDriftKeepsCentroid) {
  scenario::ScenarioConfig c;
  c.kind = 2;
  c.params.drift_east_kmph = 0.0;
  c.params.drift_north_kmph = 0.0;
  const auto frames = scenario::generate_scenario(c);
  const auto c0 = geo::descriptors(frames.front().observation.boundary).centroid;
  const auto c1 = geo::descriptors(frames.back().observation.boundary).centroid;
  EXPECT_NEAR(c0.lon, c1.lon, 1e-9);
  EXPECT_NEAR(c0.lat, c1.lat, 1e-9);
}

TEST(Scenario, Deterministic) {
  for (int kind = 1; kind <= 5; ++kind) {
    scenario::ScenarioConfig c;
    c.kind = kind;
    c.seed = 31;
    const auto a = scenario::generate_scenario(c);
    const auto b = scenario::generate_scenario(c);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].observation.boundary, b[i].observation.boundary);
  }
  scenario::ScenarioConfig bad;
  bad.kind = 9;
  EXPECT_THROW(scenario::generate_scenario(bad), Error);
}

TEST(Scenario, ForcingAdvectionSelfConsistent) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    scenario::ScenarioConfig c;
    c.kind = 3;
    c.seed = seed;
    c.duration_h = 48;
    const auto frames = scenario::generate_scenario(c);
    const geo::LocalFrame frame(c.params.origin);
    const int n = 24;  // Simpson over 24 hourly intervals
    geo::Vec2 integral{};
    for (int k = 0; k <= n; ++k) {
      const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      const auto v = scenario::drift_velocity_kmph(frames[k].env);
      integral.x += w * v.x / 3.0;
      integral.y += w * v.y / 3.0;
    }
    const auto p0 = frame.to_local(geo::descriptors(frames[0].observation.boundary).centroid);
    const auto p1 = frame.to_local(geo::descriptors(frames[n].observation.boundary).centroid);
    const double dx = p1.x - p0.x, dy = p1.y - p0.y;
    EXPECT_LT(std::hypot(dx - integral.x, dy - integral.y), 0.01 * std::hypot(integral.x, integral.y)) << seed;
  }
}

TEST(Scenario, EveryFeatureVectorSatisfiesInvariants) {
  for (int kind = 1; kind <= 5; ++kind) {
    scenario::ScenarioConfig c;
    c.kind = kind;
    c.seed = 4;
    const auto frames = scenario::generate_scenario(c);
    const auto series = feature_series(scenario::observations_of(frames), scenario::env_of(frames));
    for (const auto& s : series) {
      EXPECT_NEAR(s.x[kHourSin] * s.x[kHourSin] + s.x[kHourCos] * s.x[kHourCos], 1.0, 1e-9);
      EXPECT_NEAR(s.x[kWindSpeed], std::hypot(s.x[kWindU], s.x[kWindV]), 1e-9);
    }
  }
}

TEST(Dataset, JsonRoundTripIsExact) {
  const auto seqs = dataset::synthetic_windows(2, 5, 12);
  ASSERT_EQ(seqs.size(), 12u);
  const auto back = dataset::from_json(dataset::to_json(seqs));
  ASSERT_EQ(back.size(), seqs.size());
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    EXPECT_EQ(back[i].window, seqs[i].window);
    EXPECT_EQ(back[i].horizon_targets, seqs[i].horizon_targets);
    EXPECT_EQ(back[i].issue_time, seqs[i].issue_time);
    EXPECT_EQ(back[i].spill_id, seqs[i].spill_id);
  }
}

TEST(EnvFile, ParsesAndRejectsNegativeWaves) {
  const auto env = parse_env_json(R"([{"valid_time":"2010-04-22T00:00:00Z","wind_u":2,"wave_height":1}])");
  ASSERT_EQ(env.size(), 1u);
  EXPECT_EQ(env[0].wind_u, 2.0);
  EXPECT_THROW(parse_env_json(R"([{"valid_time":"2010-04-22","wave_height":-1}])"), Error);
}
