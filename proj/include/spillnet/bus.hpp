#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spillnet::coord {

struct FleetMessage {
  std::string key;
  std::string value;
  std::string publisher;
  std::int64_t tick = 0;
  std::uint64_t seq = 0;  // position in the global publication order
};

/// Exact match, or prefix match when the pattern ends in '*'.
bool key_matches(std::string_view pattern, std::string_view key);

/// Centralized publish/subscribe database with one global publication order.
/// Safe for concurrent use.
class Bus {
 public:
  void register_agent(const std::string& agent);
  bool is_registered(const std::string& agent) const;

  /// Throws UnknownAgent.
  void subscribe(const std::string& agent, const std::string& pattern);
  void publish(const std::string& agent, const std::string& key, const std::string& value, std::int64_t tick);

  /// Messages on subscribed keys published since this agent's previous fetch,
  /// in publication order. Throws UnknownAgent.
  std::vector<FleetMessage> fetch(const std::string& agent);

  std::optional<FleetMessage> latest(const std::string& key) const;
  std::size_t size() const;

 private:
  struct AgentInfo {
    std::size_t cursor = 0;
    std::vector<std::string> patterns;
  };

  AgentInfo& agent_info(const std::string& agent);

  mutable std::mutex mutex_;
  std::vector<FleetMessage> log_;
  std::map<std::string, AgentInfo> agents_;
  std::map<std::string, std::size_t> latest_;
};

}  // namespace spillnet::coord
