#pragma once

#include <cstdlib>
#include <iostream>
#include <string>
#include <string_view>

namespace spillnet::log {

enum class Level { Error = 0, Info = 1, Debug = 2 };

/// Read once from SPILLNET_LOG={error|info|debug}; defaults to error.
inline Level threshold() {
  static const Level level = [] {
    const char* env = std::getenv("SPILLNET_LOG");
    const std::string_view v = env ? env : "";
    if (v == "debug") return Level::Debug;
    if (v == "info") return Level::Info;
    return Level::Error;
  }();
  return level;
}

inline void write(Level level, std::string_view tag, std::string_view message) {
  if (static_cast<int>(level) <= static_cast<int>(threshold())) std::cerr << "[" << tag << "] " << message << "\n";
}

inline void error(std::string_view m) { write(Level::Error, "error", m); }
inline void info(std::string_view m) { write(Level::Info, "info", m); }
inline void debug(std::string_view m) { write(Level::Debug, "debug", m); }

}  // namespace spillnet::log
