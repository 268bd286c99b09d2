#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <thread>

#include "spillnet/error.hpp"
#include "spillnet/sim.hpp"

using namespace spillnet;
using namespace spillnet::sim;

namespace {

std::vector<coord::FleetMessage> messages(int n) {
  std::vector<coord::FleetMessage> out;
  for (int i = 0; i < n; ++i) out.push_back({"K", std::to_string(i), "p", 0, static_cast<std::uint64_t>(i)});
  return out;
}

geo::PlanarRing circle(double r, int n) {
  geo::PlanarRing ring;
  for (int k = 0; k < n; ++k) ring.push_back({r * std::cos(2 * M_PI * k / n), r * std::sin(2 * M_PI * k / n)});
  return ring;
}

SimConfig circle_config(int vehicles) {
  SimConfig c;
  c.fleet_size = vehicles;
  c.boundary_km = circle(1.5, 48);
  c.duration_h = 2;
  c.seed = 5;
  return c;
}

}  // namespace

TEST(Channel, IdentityWithoutLossOrDelay) {
  Rng rng(1);
  const auto in = messages(50);
  const auto out = channel_deliver(in, {}, 7, rng);
  ASSERT_EQ(out.size(), 50u);
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_EQ(out[i].due_tick, 7);
    EXPECT_EQ(out[i].message.value, in[i].value);
  }
}

TEST(Channel, LossFractionAndDelay) {
  Rng rng(2);
  const auto in = messages(20000);
  const auto out = channel_deliver(in, {0.3, 4}, 10, rng);
  EXPECT_NEAR(out.size() / 20000.0, 0.7, 0.02);
  for (const auto& d : out) EXPECT_EQ(d.due_tick, 14);
}

TEST(Channel, QueueDeliversDueInOrder) {
  Channel ch({0.0, 2}, 3);
  ch.send(messages(3), 0);
  EXPECT_TRUE(ch.deliver(1).empty());
  const auto got = ch.deliver(2);
  ASSERT_EQ(got.size(), 3u);
  EXPECT_EQ(got[2].value, "2");
  EXPECT_EQ(ch.in_flight(), 0u);
}

TEST(Kinematics, SnapsWhenReachable) {
  const auto p = vehicle_kinematics({{0, 0}, 0}, geo::Vec2{0.01, 0}, 10, M_PI / 2, 10);
  EXPECT_EQ(p.position, (geo::Vec2{0.01, 0}));
  const auto hold = vehicle_kinematics({{1, 2}, 0.3}, std::nullopt, 10, M_PI / 2, 10);
  EXPECT_EQ(hold.position, (geo::Vec2{1, 2}));
}

TEST(Kinematics, TurnAndStepBounded) {
  Rng rng(4);
  Pose pose{{0, 0}, 0};
  const double step = 10.0 * 10.0 / 3600.0;
  for (int i = 0; i < 2000; ++i) {
    const geo::Vec2 target{rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const auto next = vehicle_kinematics(pose, target, 10, M_PI / 4, 10);
    EXPECT_LE(std::hypot(next.position.x - pose.position.x, next.position.y - pose.position.y), step + 1e-12);
    double turn = std::remainder(next.heading - pose.heading, 2 * M_PI);
    EXPECT_LE(std::abs(turn), M_PI / 4 + 1e-12);
    pose = next;
  }
}

TEST(SimConfig, JsonRoundTripAndValidation) {
  SimConfig c;
  c.fleet_size = 3;
  c.faults = {{100, 2}};
  c.channel = {0.1, 2};
  const auto back = sim_config_from_json(sim_config_to_json(c).dump());
  EXPECT_EQ(back.fleet_size, 3);
  ASSERT_EQ(back.faults.size(), 1u);
  EXPECT_EQ(back.faults[0].vehicle, 2);
  EXPECT_EQ(back.channel.p_loss, 0.1);
  SimConfig bad;
  bad.fleet_size = 0;
  EXPECT_THROW(bad.validate(), Error);
  EXPECT_THROW(sim_config_from_json(R"({"speed_kmph": -1})"), Error);
}

TEST(Simulation, FourVehiclesContainCircle) {
  const auto r = run_simulation(circle_config(4));
  ASSERT_TRUE(r.metrics.time_to_containment_tick.has_value());
  EXPECT_EQ(r.metrics.safety_violations, 0);
  EXPECT_GE(r.metrics.max_coverage, 0.99);
  EXPECT_LE(r.metrics.max_step_km, r.metrics.step_limit_km + 1e-12);
  ASSERT_FALSE(r.metrics.assignment_arc_coverage.empty());
  for (double c : r.metrics.assignment_arc_coverage) EXPECT_EQ(c, 1.0);
  EXPECT_EQ(r.trajectories.size(), 4u);
  EXPECT_NE(r.trajectory_geojson().find("FeatureCollection"), std::string::npos);
}

TEST(Simulation, DeterministicEventLog) {
  auto c = circle_config(3);
  c.channel = {0.2, 1};
  const auto a = run_simulation(c);
  const auto b = run_simulation(c);
  EXPECT_EQ(a.log.jsonl(), b.log.jsonl());
  c.seed = 6;
  EXPECT_NE(run_simulation(c).log.jsonl(), a.log.jsonl());
}

TEST(Simulation, DroppedVehicleTriggersFullReplan) {
  auto c = circle_config(5);
  c.duration_h = 3;
  c.faults = {{300, 3}};
  const auto r = run_simulation(c);
  ASSERT_EQ(r.metrics.faults.size(), 1u);
  const auto& f = r.metrics.faults[0];
  ASSERT_TRUE(f.detected_tick && f.replan_tick && f.recontained_tick);
  EXPECT_EQ(f.replan_arcs, 4);
  EXPECT_EQ(f.replan_arc_coverage, 1.0);
  EXPECT_EQ(r.metrics.safety_violations, 0);
  EXPECT_GE(r.log.count("vehicle_lost"), 1u);
}

TEST(Simulation, LosingEveryVehicleIsCritical) {
  auto c = circle_config(2);
  c.duration_h = 1;
  c.faults = {{10, 1}, {10, 2}};
  const auto r = run_simulation(c);
  EXPECT_EQ(r.log.count("CRITICAL"), 1u);
}

TEST(Simulation, ScenarioBoundaryWithOracle) {
  SimConfig c;
  c.scenario_kind = 2;
  c.scenario_seed = 3;
  c.duration_h = 2;
  const auto r = run_simulation(c);
  EXPECT_TRUE(r.metrics.time_to_containment_tick.has_value());
  EXPECT_EQ(r.metrics.safety_violations, 0);
}

TEST(TcpIngress, ReceivesUpdatesAndCountsBadLines) {
  TcpIngress ingress(0);
  ASSERT_NE(ingress.port(), 0);
  const BoundaryUpdate u{"s1", geo::GeoPolygon({{-88.5, 28.5}, {-88.4, 28.5}, {-88.4, 28.6}}), 1271894400};
  send_lines(ingress.port(), format_boundary_update(u) + "\nnot json\n");
  std::vector<BoundaryUpdate> got;
  for (int i = 0; i < 200 && (got.empty() || ingress.rejected() == 0); ++i) {
    auto more = ingress.poll();
    got.insert(got.end(), more.begin(), more.end());
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].boundary, u.boundary);
  EXPECT_EQ(got[0].timestamp, u.timestamp);
  EXPECT_EQ(ingress.rejected(), 1u);
  ingress.stop();
}

TEST(TcpIngress, ParseErrorsAreTyped) {
  EXPECT_THROW(parse_boundary_update("{"), Error);
  EXPECT_THROW(parse_boundary_update(R"({"type":"OTHER"})"), Error);
}
