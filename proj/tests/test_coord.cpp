#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "model_check.hpp"
#include "spillnet/assign.hpp"
#include "spillnet/bus.hpp"
#include "spillnet/error.hpp"
#include "spillnet/fleet.hpp"
#include "spillnet/rng.hpp"

using namespace spillnet;
using namespace spillnet::coord;

namespace {

FleetMessage msg(std::string key, std::string value) { return {std::move(key), std::move(value), "shoreside", 0, 0}; }

// Minimum over every permutation of the summed vehicle-to-slot distances.
double brute_force(const std::vector<geo::Vec2>& pos, const std::vector<geo::Vec2>& starts) {
  std::vector<int> perm(pos.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double t = 0;
    for (std::size_t i = 0; i < pos.size(); ++i) t += std::hypot(pos[i].x - starts[perm[i]].x, pos[i].y - starts[perm[i]].y);
    best = std::min(best, t);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::vector<geo::Vec2> random_convex(Rng& rng, int n, double r) {
  std::vector<double> angles(n);
  for (auto& a : angles) a = rng.uniform(0, 2 * M_PI);
  std::sort(angles.begin(), angles.end());
  std::vector<geo::Vec2> ring;
  for (double a : angles) {
    const double rr = r * rng.uniform(0.7, 1.3);
    ring.push_back({rr * std::cos(a), rr * std::sin(a)});
  }
  return ring;
}

// Union of [start, start + length) arcs modulo L covers the whole circle.
bool intervals_cover(const Assignment& a) {
  const double L = a.perimeter_km;
  std::vector<std::pair<double, double>> iv;
  for (const auto& p : a.plans) {
    const double s = p.arc_start_km, e = s + p.arc_length_km;
    if (e <= L) {
      iv.push_back({s, e});
    } else {
      iv.push_back({s, L});
      iv.push_back({0, e - L});
    }
  }
  std::sort(iv.begin(), iv.end());
  double reach = 0;
  for (auto [s, e] : iv) {
    if (s > reach + 1e-9) return false;
    reach = std::max(reach, e);
  }
  return reach >= L - 1e-9;
}

}  // namespace

TEST(Bus, FetchReturnsSubscribedInPublicationOrder) {
  Bus bus;
  bus.register_agent("a");
  bus.register_agent("b");
  bus.subscribe("b", "NAV_*");
  bus.subscribe("b", "STATION_KEEP_ALL");
  bus.publish("a", "NAV_X_1", "1", 0);
  bus.publish("a", "OTHER", "x", 0);
  bus.publish("a", "STATION_KEEP_ALL", "true", 1);
  bus.publish("a", "NAV_Y_1", "2", 1);
  const auto got = bus.fetch("b");
  ASSERT_EQ(got.size(), 3u);
  EXPECT_EQ(got[0].key, "NAV_X_1");
  EXPECT_EQ(got[1].key, "STATION_KEEP_ALL");
  EXPECT_EQ(got[2].key, "NAV_Y_1");
  EXPECT_LT(got[0].seq, got[1].seq);
  EXPECT_TRUE(bus.fetch("b").empty());
  EXPECT_EQ(bus.latest("OTHER")->value, "x");
  EXPECT_THROW(bus.fetch("ghost"), Error);
  EXPECT_THROW(bus.publish("ghost", "k", "v", 0), Error);
}

TEST(Bus, KeyPatterns) {
  EXPECT_TRUE(key_matches("NAV_*", "NAV_X_3"));
  EXPECT_TRUE(key_matches("RETURN_2", "RETURN_2"));
  EXPECT_FALSE(key_matches("RETURN_2", "RETURN_21"));
  EXPECT_FALSE(key_matches("NAV_*", "NA"));
}

TEST(Bus, ConcurrentPublishersKeepOneOrder) {
  Bus bus;
  for (int i = 0; i < 4; ++i) bus.register_agent("p" + std::to_string(i));
  bus.register_agent("r");
  bus.subscribe("r", "*");
  std::vector<std::thread> threads;
  for (int i = 0; i < 4; ++i)
    threads.emplace_back([&, i] {
      for (int k = 0; k < 250; ++k) bus.publish("p" + std::to_string(i), "K" + std::to_string(i), std::to_string(k), k);
    });
  for (auto& t : threads) t.join();
  const auto all = bus.fetch("r");
  ASSERT_EQ(all.size(), 1000u);
  for (std::size_t i = 1; i < all.size(); ++i) EXPECT_LT(all[i - 1].seq, all[i].seq);
}

TEST(Codec, RoundTripsAndRejectsGarbage) {
  const StartCommand s{{1.0 / 3.0, -2.5}, 4, 9};
  const auto back = parse_start(format_start(s));
  EXPECT_EQ(back.point, s.point);
  EXPECT_EQ(back.cycle, 4);
  EXPECT_EQ(back.seq, 9u);
  const PathCommand p{2, 5, {{0, 0}, {0.1, 0.2}, {1e-9, 3}}};
  EXPECT_EQ(parse_path(format_path(p)).points, p.points);
  EXPECT_EQ(parse_nav(format_nav({-0.125, 3, 7})).value, -0.125);
  EXPECT_EQ(parse_flag(format_flag(12)).cycle, 12);
  EXPECT_THROW(parse_start("x=1,cycle=2"), Error);
  EXPECT_THROW(parse_nav("nan,cycle=1,seq=0"), Error);
  EXPECT_THROW(parse_path("cycle=1,seq=1,pts=1:2;3"), Error);
  EXPECT_EQ(addressee(keys::starting_position(3)), 3);
  EXPECT_EQ(addressee(keys::nav_x(3)), std::nullopt);
}

TEST(Hungarian, ThreeByThree) {
  const std::vector<std::vector<double>> c{{4, 1, 3}, {2, 0, 5}, {3, 2, 2}};
  const auto m = hungarian(c);
  double total = 0;
  for (std::size_t i = 0; i < 3; ++i) total += c[i][m[i]];
  EXPECT_EQ(total, 5.0);
}

TEST(Assign, MatchesBruteForceAndCoversPerimeter) {
  Rng rng(77);
  PlanningConfig cfg;
  for (int inst = 0; inst < 50; ++inst) {
    const int N = 1 + static_cast<int>(rng.below(6));
    const auto ring = random_convex(rng, 6 + static_cast<int>(rng.below(10)), rng.uniform(1, 5));
    std::vector<geo::Vec2> pos(N);
    for (auto& p : pos) p = {rng.uniform(-8, 8), rng.uniform(-8, 8)};
    const auto a = assign_paths(ring, pos, cfg);
    // oracle: same phase grid, every permutation
    double L = 0;
    for (std::size_t i = 0; i < ring.size(); ++i) L += distance(ring[i], ring[(i + 1) % ring.size()]);
    const int phases = cfg.phases_per_vehicle * N;
    double best = INFINITY;
    for (int j = 0; j < phases; ++j) {
      std::vector<geo::Vec2> starts;
      for (int k = 0; k < N; ++k) starts.push_back(point_at(ring, j * L / phases + k * L / N));
      best = std::min(best, brute_force(pos, starts));
    }
    EXPECT_NEAR(a.total_transit_km, best, 1e-9) << "instance " << inst;
    EXPECT_TRUE(intervals_cover(a)) << "instance " << inst;
    EXPECT_EQ(arc_coverage(ring, a.plans), 1.0) << "instance " << inst;
    for (const auto& p : a.plans) EXPECT_EQ(p.start, p.waypoints.front());
  }
}

TEST(Assign, Errors) {
  const std::vector<geo::Vec2> ring{{0, 0}, {1, 0}, {0, 1}}, none;
  EXPECT_THROW(assign_paths(ring, none), Error);
  const std::vector<geo::Vec2> line{{0, 0}, {1, 0}}, one{{0, 0}};
  EXPECT_THROW(assign_paths(line, one), Error);
}

TEST(Assign, WaypointSpacingBounded) {
  const std::vector<geo::Vec2> ring{{0, 0}, {3, 0}, {3, 3}, {0, 3}};
  const auto w = arc_waypoints(ring, 1.0, 5.0, 0.4);
  for (std::size_t i = 1; i < w.size(); ++i) EXPECT_LE(distance(w[i - 1], w[i]), 0.4 + 1e-12);
  EXPECT_NEAR(distance(w.back(), point_at(ring, 6.0)), 0.0, 1e-12);
}

TEST(Fsm, StartThenPathOnlyAfterReached) {
  auto v = make_vehicle(1, {0, 0});
  const std::vector<FleetMessage> start{msg(std::string(keys::kStationKeepAll), format_flag(1)),
                                        msg(keys::starting_position(1), format_start({{1, 0}, 1, 1}))};
  auto out = fsm_step(v, start, {0, 0}, 1);
  EXPECT_EQ(v.mode, Mode::StartingPosition);
  ASSERT_TRUE(out.target);
  EXPECT_EQ(*out.target, (geo::Vec2{1, 0}));
  // path before arrival is ignored
  const std::vector<FleetMessage> path{msg(keys::oil_path(1), format_path({1, 2, {{1, 0}, {2, 0}}}))};
  fsm_step(v, path, {0.5, 0}, 2);
  EXPECT_EQ(v.mode, Mode::StartingPosition);
  out = fsm_step(v, {}, {1, 0}, 3);
  EXPECT_TRUE(v.awaiting);
  EXPECT_TRUE(std::ranges::any_of(out.outbox, [](const Outgoing& o) { return o.key == keys::reached(1); }));
  fsm_step(v, path, {1, 0}, 4);
  EXPECT_EQ(v.mode, Mode::OilPath);
  EXPECT_TRUE(v.loop_flag);
}

TEST(Fsm, StaleCycleCommandsIgnored) {
  auto v = make_vehicle(2, {0, 0});
  const std::vector<FleetMessage> c2{msg(std::string(keys::kStationKeepAll), format_flag(2))};
  fsm_step(v, c2, {0, 0}, 1);
  EXPECT_EQ(v.cycle, 2);
  const std::vector<FleetMessage> old{msg(keys::starting_position(2), format_start({{5, 5}, 1, 1}))};
  fsm_step(v, old, {0, 0}, 2);
  EXPECT_EQ(v.mode, Mode::StationKeeping);
  const std::vector<FleetMessage> other{msg(keys::starting_position(3), format_start({{5, 5}, 2, 1}))};
  fsm_step(v, other, {0, 0}, 3);
  EXPECT_EQ(v.mode, Mode::StationKeeping);
}

TEST(Fsm, MalformedIsReportedAndSkipped) {
  auto v = make_vehicle(1, {0, 0});
  const std::vector<FleetMessage> bad{msg(keys::starting_position(1), "garbage")};
  const auto out = fsm_step(v, bad, {0, 0}, 1);
  EXPECT_EQ(out.malformed.size(), 1u);
  EXPECT_EQ(v.mode, Mode::StationKeeping);
}

TEST(Fsm, ReturnAndWatchdog) {
  auto v = make_vehicle(1, {0, 0});
  const std::vector<FleetMessage> ret{msg(keys::ret(1), "true")};
  fsm_step(v, ret, {2, 0}, 1);
  EXPECT_EQ(v.mode, Mode::Returning);
  auto w = make_vehicle(2, {0, 0});
  const std::vector<FleetMessage> hello{msg(std::string(keys::kStationKeepAll), format_flag(1))};
  FleetTiming t{3, 5};
  fsm_step(w, hello, {0, 0}, 0, {}, t);
  const auto out = fsm_step(w, {}, {0, 0}, 5, {}, t);
  EXPECT_EQ(w.mode, Mode::Returning);
  EXPECT_TRUE(w.self_returned);
  EXPECT_NE(std::ranges::find(out.events, "shoreside_silent"), out.events.end());
  // a new cycle brings it back
  const std::vector<FleetMessage> again{msg(std::string(keys::kStationKeepAll), format_flag(1))};
  fsm_step(w, again, {0, 0}, 6, {}, t);
  EXPECT_EQ(w.mode, Mode::StationKeeping);
}

TEST(Fsm, NavPublishedEveryTick) {
  auto v = make_vehicle(4, {0, 0});
  for (int t = 0; t < 3; ++t) {
    const auto out = fsm_step(v, {}, {0.25, -1.5}, t);
    ASSERT_EQ(out.outbox.size(), 2u);
    EXPECT_EQ(out.outbox[0].key, keys::nav_x(4));
    EXPECT_EQ(parse_nav(out.outbox[1].value).value, -1.5);
  }
}

TEST(Shoreside, PhasesInOrder) {
  Shoreside s({1, 2});
  const std::vector<geo::Vec2> ring{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  auto out = s.on_boundary(ring, 0);
  EXPECT_EQ(s.phase(), Phase::CollectPositions);
  EXPECT_EQ(s.cycle(), 1);
  ASSERT_EQ(out.outbox.size(), 1u);
  EXPECT_EQ(out.outbox[0].key, keys::kStationKeepAll);
  // stale-cycle NAV does not count
  std::vector<FleetMessage> nav{msg(keys::nav_x(1), format_nav({-1, 0, 0})), msg(keys::nav_y(1), format_nav({0, 0, 0}))};
  s.step(nav, 1);
  EXPECT_EQ(s.phase(), Phase::CollectPositions);
  nav = {msg(keys::nav_x(1), format_nav({-1, 1, 0})), msg(keys::nav_y(1), format_nav({0, 1, 0})),
         msg(keys::nav_x(2), format_nav({2, 1, 0})), msg(keys::nav_y(2), format_nav({1, 1, 0}))};
  out = s.step(nav, 2);
  EXPECT_EQ(s.phase(), Phase::AwaitReached);
  EXPECT_EQ(std::ranges::count_if(out.outbox, [](const Outgoing& o) { return o.key.starts_with("STARTING"); }), 2);
  const std::vector<FleetMessage> r1{msg(keys::reached(1), format_flag(1))};
  out = s.step(r1, 3);
  EXPECT_EQ(s.phase(), Phase::AwaitReached);
  EXPECT_FALSE(std::ranges::any_of(out.outbox, [](const Outgoing& o) { return o.key.starts_with("OIL_PATH"); }));
  const std::vector<FleetMessage> r2{msg(keys::reached(2), format_flag(1))};
  out = s.step(r2, 4);
  EXPECT_EQ(s.phase(), Phase::Containment);
  EXPECT_EQ(std::ranges::count_if(out.outbox, [](const Outgoing& o) { return o.key.starts_with("OIL_PATH"); }), 2);
}

TEST(Shoreside, LostVehicleTriggersReplanAndCritical) {
  Shoreside s({1}, {}, {3, 5});
  const std::vector<geo::Vec2> ring{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  s.on_boundary(ring, 0);
  auto out = s.step({}, 5);
  EXPECT_EQ(s.lost(), std::set<int>{1});
  EXPECT_TRUE(s.active().empty());
  EXPECT_EQ(s.phase(), Phase::Idle);
  EXPECT_TRUE(std::ranges::any_of(out.events, [](const ShoreEvent& e) { return e.kind == "CRITICAL"; }));
  EXPECT_TRUE(std::ranges::any_of(out.outbox, [](const Outgoing& o) { return o.key == keys::ret(1); }));
}

TEST(Shoreside, HeartbeatRebroadcasts) {
  Shoreside s({1}, {}, {3, 100});
  const std::vector<geo::Vec2> ring{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  s.on_boundary(ring, 0);
  EXPECT_TRUE(s.step({}, 1).outbox.empty());
  const auto out = s.step({}, 3);
  ASSERT_EQ(out.outbox.size(), 1u);
  EXPECT_EQ(out.outbox[0].key, keys::kStationKeepAll);
}

TEST(ModelCheck, SmallFleetsSafeUnderBoundedAdversary) {
  for (int n = 1; n <= 2; ++n) {
    spillnet::testing::McConfig c;
    c.vehicles = n;
    c.ticks = 30;
    c.budget = 1;
    const auto r = spillnet::testing::model_check(c);
    EXPECT_EQ(r.violations, 0u) << r.first_violation;
    EXPECT_TRUE(r.reached_containment);
    EXPECT_GT(r.states, 30u);
  }
}

TEST(ModelCheck, MonitorCatchesUnsafeVehicle) {
  spillnet::testing::McState s{Shoreside({1, 2}), {make_vehicle(1, {0, 0}), make_vehicle(2, {0, 0})}, {}, 0, 0, {}, {}};
  s.assigned_by_cycle[1] = {1, 2};
  s.reached_published.insert({1, 1});
  s.vehicles[0].mode = Mode::OilPath;
  s.vehicles[0].cycle = 1;
  EXPECT_TRUE(spillnet::testing::detail::violation(s).has_value());
  s.reached_published.insert({2, 1});
  EXPECT_FALSE(spillnet::testing::detail::violation(s).has_value());
}
