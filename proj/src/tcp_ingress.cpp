#include "spillnet/tcp_ingress.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "spillnet/error.hpp"
#include "spillnet/ingest.hpp"
#include "spillnet/jsonutil.hpp"
#include "spillnet/log.hpp"

namespace spillnet::sim {

using jsonutil::json;

BoundaryUpdate parse_boundary_update(std::string_view line) {
  const json doc = jsonutil::parse(line);
  jsonutil::check_schema_version(doc);
  if (jsonutil::get_as<std::string>(doc, "", "type") != "BOUNDARY_UPDATE") {
    jsonutil::schema_error("/type", "expected BOUNDARY_UPDATE");
  }
  const auto spill_id = jsonutil::get_or<std::string>(doc, "", "spill_id", "");
  const UtcSeconds timestamp = parse_iso8601(jsonutil::get_as<std::string>(doc, "", "timestamp_utc"));
  const json& ext = jsonutil::require(doc, "", "exterior");
  if (!ext.is_array()) jsonutil::schema_error("/exterior", "expected array");
  geo::Ring ring;
  for (std::size_t i = 0; i < ext.size(); ++i) {
    const json& p = ext[i];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      jsonutil::schema_error("/exterior/" + std::to_string(i), "expected [lon, lat]");
    }
    ring.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return {spill_id, geo::GeoPolygon(std::move(ring)), timestamp};
}

std::string format_boundary_update(const BoundaryUpdate& update) {
  json ext = json::array();
  for (const auto& p : update.boundary.exterior()) ext.push_back({p.lon, p.lat});
  json doc = {{"type", "BOUNDARY_UPDATE"},
              {"spill_id", update.spill_id},
              {"exterior", ext},
              {"timestamp_utc", format_iso8601(update.timestamp)}};
  return doc.dump();
}

std::vector<BoundaryUpdate> read_boundary_updates(const std::filesystem::path& path) {
  const std::string text = ingest::read_text_file(path);
  std::vector<BoundaryUpdate> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    const std::string_view line(text.data() + pos, nl - pos);
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) out.push_back(parse_boundary_update(line));
    pos = nl + 1;
  }
  return out;
}

TcpIngress::TcpIngress(std::uint16_t port) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw Error(ErrorCode::IoError, std::string("socket: ") + std::strerror(errno));
  int yes = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listen_fd_, 4) < 0) {
    const std::string why = std::strerror(errno);
    ::close(listen_fd_);
    throw Error(ErrorCode::IoError, "listen on port " + std::to_string(port) + ": " + why);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  thread_ = std::thread([this] { serve(); });
}

TcpIngress::~TcpIngress() { stop(); }

void TcpIngress::stop() {
  if (stopping_.exchange(true)) return;
  if (thread_.joinable()) thread_.join();
  if (listen_fd_ >= 0) ::close(listen_fd_);
  listen_fd_ = -1;
}

std::vector<BoundaryUpdate> TcpIngress::poll() {
  std::lock_guard lock(mutex_);
  std::vector<BoundaryUpdate> out;
  out.swap(pending_);
  return out;
}

void TcpIngress::handle_line(const std::string& line) {
  if (line.find_first_not_of(" \t\r") == std::string::npos) return;
  try {
    auto u = parse_boundary_update(line);
    std::lock_guard lock(mutex_);
    pending_.push_back(std::move(u));
  } catch (const Error& e) {
    ++rejected_;
    log::error(std::string("tcp ingress rejected line: ") + e.what());
  }
}

void TcpIngress::serve() {
  std::vector<pollfd> fds{{listen_fd_, POLLIN, 0}};
  std::vector<std::string> buffers{""};
  while (!stopping_) {
    if (::poll(fds.data(), fds.size(), 50) <= 0) continue;
    if (fds[0].revents & POLLIN) {
      const int c = ::accept(listen_fd_, nullptr, nullptr);
      if (c >= 0) {
        fds.push_back({c, POLLIN, 0});
        buffers.emplace_back();
      }
    }
    for (std::size_t i = 1; i < fds.size();) {
      if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) {
        ++i;
        continue;
      }
      char chunk[4096];
      const ssize_t n = ::read(fds[i].fd, chunk, sizeof chunk);
      if (n > 0) {
        buffers[i].append(chunk, static_cast<std::size_t>(n));
        std::size_t nl;
        while ((nl = buffers[i].find('\n')) != std::string::npos) {
          handle_line(buffers[i].substr(0, nl));
          buffers[i].erase(0, nl + 1);
        }
        ++i;
      } else {
        handle_line(buffers[i]);
        ::close(fds[i].fd);
        fds.erase(fds.begin() + static_cast<std::ptrdiff_t>(i));
        buffers.erase(buffers.begin() + static_cast<std::ptrdiff_t>(i));
      }
    }
  }
  for (std::size_t i = 1; i < fds.size(); ++i) ::close(fds[i].fd);
}

void send_lines(std::uint16_t port, std::string_view payload) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw Error(ErrorCode::IoError, "socket failed");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
    ::close(fd);
    throw Error(ErrorCode::IoError, "connect to port " + std::to_string(port) + " failed");
  }
  std::size_t sent = 0;
  while (sent < payload.size()) {
    const ssize_t n = ::write(fd, payload.data() + sent, payload.size() - sent);
    if (n <= 0) break;
    sent += static_cast<std::size_t>(n);
  }
  ::close(fd);
}

}  // namespace spillnet::sim
