#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "spillnet/geo.hpp"
#include "spillnet/timeutil.hpp"

namespace spillnet::sim {

/// {"type":"BOUNDARY_UPDATE","spill_id":...,"exterior":[[lon,lat],...],"timestamp_utc":...}
struct BoundaryUpdate {
  std::string spill_id;
  geo::GeoPolygon boundary;
  UtcSeconds timestamp = 0;
};

/// Throws ParseError, SchemaError, GeometryError.
BoundaryUpdate parse_boundary_update(std::string_view line);
std::string format_boundary_update(const BoundaryUpdate& update);

/// Newline-delimited file of updates; blank lines skipped.
std::vector<BoundaryUpdate> read_boundary_updates(const std::filesystem::path& path);

/// Listens on 127.0.0.1:`port` (0 picks a free port) and parses each received
/// line. Bad lines are counted and logged, never fatal.
class TcpIngress {
 public:
  explicit TcpIngress(std::uint16_t port);
  ~TcpIngress();
  TcpIngress(const TcpIngress&) = delete;
  TcpIngress& operator=(const TcpIngress&) = delete;

  std::uint16_t port() const { return port_; }
  /// Updates received since the previous call, in arrival order.
  std::vector<BoundaryUpdate> poll();
  std::size_t rejected() const { return rejected_; }
  void stop();

 private:
  void serve();
  void handle_line(const std::string& line);

  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::atomic<std::size_t> rejected_{0};
  std::mutex mutex_;
  std::vector<BoundaryUpdate> pending_;
  std::thread thread_;
};

/// Test and CLI helper: connects to 127.0.0.1:port and writes `payload`.
void send_lines(std::uint16_t port, std::string_view payload);

}  // namespace spillnet::sim
