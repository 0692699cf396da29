#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

// Thin POSIX TCP layer: endpoints, RAII sockets, deadline-bounded I/O and
// LF-delimited line reading.
namespace sg::net {

using Clock = std::chrono::steady_clock;
using Deadline = std::optional<Clock::time_point>;

struct Endpoint {
  std::string host;
  std::uint16_t port{0};

  std::string to_string() const { return host + ":" + std::to_string(port); }
};

class NetError : public std::runtime_error {
public:
  enum class Kind { kTimeout, kRefused, kClosed, kIo, kLineTooLong };

  NetError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

private:
  Kind kind_;
};

class Socket {
public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { close(); }

  int fd() const noexcept { return fd_; }
  bool valid() const noexcept { return fd_ >= 0; }
  void close() noexcept;
  void shutdown_read() noexcept;
  void shutdown_both() noexcept;

  /// Port the socket is bound to locally.
  std::uint16_t local_port() const;

private:
  int fd_{-1};
};

Socket connect_to(const Endpoint& ep, Deadline deadline);
Socket listen_on(const Endpoint& ep, int backlog = 128);

/// Accepts one connection; returns an invalid socket when the listener was shut down.
Socket accept_from(const Socket& listener);

void send_all(const Socket& sock, std::string_view bytes, Deadline deadline);

/// Buffers reads from one socket and yields complete LF-terminated lines.
class LineReader {
public:
  explicit LineReader(const Socket& sock, std::size_t max_line = 16 * 1024 * 1024)
    : sock_(&sock), max_line_(max_line) {}

  /// Next line without its LF; nullopt on orderly EOF with no partial data.
  std::optional<std::string> read_line(Deadline deadline);

private:
  const Socket* sock_;
  std::size_t max_line_;
  std::string buffer_;
  std::size_t scanned_{0};
};

}  // namespace sg::net

namespace sg {

/// Parses "host:port"; throws ValidationError("address", ...) when malformed.
net::Endpoint parse_endpoint(std::string_view address);

}  // namespace sg
