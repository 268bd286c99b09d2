#include "spillnet/bus.hpp"

#include <algorithm>

#include "spillnet/error.hpp"

namespace spillnet::coord {

bool key_matches(std::string_view pattern, std::string_view key) {
  if (!pattern.empty() && pattern.back() == '*') {
    const auto prefix = pattern.substr(0, pattern.size() - 1);
    return key.substr(0, prefix.size()) == prefix;
  }
  return pattern == key;
}

void Bus::register_agent(const std::string& agent) {
  std::lock_guard lock(mutex_);
  agents_.try_emplace(agent, AgentInfo{log_.size(), {}});
}

bool Bus::is_registered(const std::string& agent) const {
  std::lock_guard lock(mutex_);
  return agents_.contains(agent);
}

Bus::AgentInfo& Bus::agent_info(const std::string& agent) {
  auto it = agents_.find(agent);
  if (it == agents_.end()) throw Error(ErrorCode::UnknownAgent, "agent '" + agent + "' is not registered");
  return it->second;
}

void Bus::subscribe(const std::string& agent, const std::string& pattern) {
  std::lock_guard lock(mutex_);
  auto& info = agent_info(agent);
  if (std::ranges::find(info.patterns, pattern) == info.patterns.end()) info.patterns.push_back(pattern);
}

void Bus::publish(const std::string& agent, const std::string& key, const std::string& value, std::int64_t tick) {
  std::lock_guard lock(mutex_);
  agent_info(agent);
  latest_[key] = log_.size();
  log_.push_back({key, value, agent, tick, static_cast<std::uint64_t>(log_.size())});
}

std::vector<FleetMessage> Bus::fetch(const std::string& agent) {
  std::lock_guard lock(mutex_);
  auto& info = agent_info(agent);
  std::vector<FleetMessage> out;
  for (std::size_t i = info.cursor; i < log_.size(); ++i) {
    const auto& m = log_[i];
    if (std::ranges::any_of(info.patterns, [&](const std::string& p) { return key_matches(p, m.key); })) {
      out.push_back(m);
    }
  }
  info.cursor = log_.size();
  return out;
}

std::optional<FleetMessage> Bus::latest(const std::string& key) const {
  std::lock_guard lock(mutex_);
  auto it = latest_.find(key);
  if (it == latest_.end()) return std::nullopt;
  return log_[it->second];
}

std::size_t Bus::size() const {
  std::lock_guard lock(mutex_);
  return log_.size();
}

}  // namespace spillnet::coord
