#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "spillnet/bus.hpp"
#include "spillnet/rng.hpp"

namespace spillnet::sim {

struct ChannelConfig {
  double p_loss = 0.0;
  std::int64_t delay_ticks = 0;
};

struct Delivery {
  std::int64_t due_tick = 0;
  coord::FleetMessage message;
};

/// Drops each message independently with probability p_loss; survivors are
/// due exactly delay_ticks after `tick`, in input order.
std::vector<Delivery> channel_deliver(std::span<const coord::FleetMessage> messages, const ChannelConfig& config,
                                      std::int64_t tick, Rng& rng);

/// One directed link with its own loss stream.
class Channel {
 public:
  Channel(ChannelConfig config, std::uint64_t seed);

  void send(std::span<const coord::FleetMessage> messages, std::int64_t tick);
  /// Everything due at or before `tick`, in send order.
  std::vector<coord::FleetMessage> deliver(std::int64_t tick);
  std::size_t in_flight() const { return queue_.size(); }
  std::uint64_t dropped() const { return dropped_; }

 private:
  ChannelConfig config_;
  Rng rng_;
  std::deque<Delivery> queue_;
  std::uint64_t dropped_ = 0;
};

}  // namespace spillnet::sim
