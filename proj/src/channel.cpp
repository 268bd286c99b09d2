#include "spillnet/channel.hpp"

namespace spillnet::sim {

std::vector<Delivery> channel_deliver(std::span<const coord::FleetMessage> messages, const ChannelConfig& config,
                                      std::int64_t tick, Rng& rng) {
  std::vector<Delivery> out;
  out.reserve(messages.size());
  for (const auto& m : messages) {
    if (config.p_loss > 0.0 && rng.bernoulli(config.p_loss)) continue;
    out.push_back({tick + config.delay_ticks, m});
  }
  return out;
}

Channel::Channel(ChannelConfig config, std::uint64_t seed) : config_(config), rng_(seed) {}

void Channel::send(std::span<const coord::FleetMessage> messages, std::int64_t tick) {
  auto sent = channel_deliver(messages, config_, tick, rng_);
  dropped_ += messages.size() - sent.size();
  for (auto& d : sent) queue_.push_back(std::move(d));
}

std::vector<coord::FleetMessage> Channel::deliver(std::int64_t tick) {
  std::vector<coord::FleetMessage> out;
  while (!queue_.empty() && queue_.front().due_tick <= tick) {
    out.push_back(std::move(queue_.front().message));
    queue_.pop_front();
  }
  return out;
}

}  // namespace spillnet::sim
