#include "sg/net.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

#include "sg/error.hpp"

namespace sg {

net::Endpoint parse_endpoint(std::string_view address) {
  auto colon = address.rfind(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == address.size()) {
    throw ValidationError("address", "expected host:port, got \"" + std::string(address) + "\"");
  }
  std::string_view port_text = address.substr(colon + 1);
  unsigned port = 0;
  auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port > 65535) {
    throw ValidationError("address", "invalid port in \"" + std::string(address) + "\"");
  }
  return net::Endpoint{std::string(address.substr(0, colon)), static_cast<std::uint16_t>(port)};
}

}  // namespace sg

namespace sg::net {

namespace {

int remaining_ms(const Deadline& deadline) {
  if (!deadline) return -1;
  auto left = std::chrono::duration_cast<std::chrono::milliseconds>(*deadline - Clock::now());
  return left.count() < 0 ? 0 : static_cast<int>(left.count());
}

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

sockaddr_in resolve(const Endpoint& ep) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(ep.port);
  std::string host = ep.host == "localhost" ? "127.0.0.1" : ep.host;
  if (host == "*" || host.empty()) host = "0.0.0.0";
  if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) == 1) return addr;

  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr) {
    throw NetError(NetError::Kind::kRefused, "cannot resolve host " + host);
  }
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  freeaddrinfo(res);
  return addr;
}

// Waits for `events`; returns false on timeout.
bool wait_for(int fd, short events, const Deadline& deadline) {
  pollfd pfd{fd, events, 0};
  for (;;) {
    int rc = ::poll(&pfd, 1, remaining_ms(deadline));
    if (rc > 0) return true;
    if (rc == 0) return false;
    if (errno != EINTR) throw NetError(NetError::Kind::kIo, errno_text("poll"));
  }
}

}  // namespace

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = std::exchange(other.fd_, -1);
  }
  return *this;
}

void Socket::close() noexcept {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void Socket::shutdown_read() noexcept {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RD);
}

void Socket::shutdown_both() noexcept {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

std::uint16_t Socket::local_port() const {
  sockaddr_in addr{};
  socklen_t len = sizeof(addr);
  if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
    throw NetError(NetError::Kind::kIo, errno_text("getsockname"));
  }
  return ntohs(addr.sin_port);
}

Socket connect_to(const Endpoint& ep, Deadline deadline) {
  sockaddr_in addr = resolve(ep);
  Socket sock(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC | SOCK_NONBLOCK, 0));
  if (!sock.valid()) throw NetError(NetError::Kind::kIo, errno_text("socket"));

  int rc = ::connect(sock.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
  if (rc != 0 && errno != EINPROGRESS) {
    throw NetError(NetError::Kind::kRefused, errno_text("connect"));
  }
  if (rc != 0) {
    if (!wait_for(sock.fd(), POLLOUT, deadline)) {
      throw NetError(NetError::Kind::kTimeout, "connect to " + ep.to_string() + " timed out");
    }
    int err = 0;
    socklen_t len = sizeof(err);
    ::getsockopt(sock.fd(), SOL_SOCKET, SO_ERROR, &err, &len);
    if (err != 0) {
      throw NetError(NetError::Kind::kRefused,
                     "connect to " + ep.to_string() + ": " + std::strerror(err));
    }
  }
  int one = 1;
  ::setsockopt(sock.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return sock;
}

Socket listen_on(const Endpoint& ep, int backlog) {
  sockaddr_in addr = resolve(ep);
  Socket sock(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!sock.valid()) throw NetError(NetError::Kind::kIo, errno_text("socket"));
  int one = 1;
  ::setsockopt(sock.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(sock.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    throw Error("BindFailed", errno_text(("bind " + ep.to_string()).c_str()));
  }
  if (::listen(sock.fd(), backlog) != 0) {
    throw Error("BindFailed", errno_text("listen"));
  }
  return sock;
}

Socket accept_from(const Socket& listener) {
  for (;;) {
    int fd = ::accept4(listener.fd(), nullptr, nullptr, SOCK_CLOEXEC | SOCK_NONBLOCK);
    if (fd >= 0) {
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      return Socket(fd);
    }
    if (errno == EINTR || errno == ECONNABORTED) continue;
    return Socket();
  }
}

void send_all(const Socket& sock, std::string_view bytes, Deadline deadline) {
  while (!bytes.empty()) {
    ssize_t n = ::send(sock.fd(), bytes.data(), bytes.size(), MSG_NOSIGNAL);
    if (n > 0) {
      bytes.remove_prefix(static_cast<std::size_t>(n));
      continue;
    }
    if (n < 0 && errno == EINTR) continue;
    if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) {
      if (!wait_for(sock.fd(), POLLOUT, deadline)) {
        throw NetError(NetError::Kind::kTimeout, "send timed out");
      }
      continue;
    }
    throw NetError(NetError::Kind::kClosed, errno_text("send"));
  }
}

std::optional<std::string> LineReader::read_line(Deadline deadline) {
  for (;;) {
    auto lf = buffer_.find('\n', scanned_);
    if (lf != std::string::npos) {
      std::string line = buffer_.substr(0, lf);
      buffer_.erase(0, lf + 1);
      scanned_ = 0;
      return line;
    }
    scanned_ = buffer_.size();
    if (buffer_.size() > max_line_) {
      throw NetError(NetError::Kind::kLineTooLong, "line exceeds limit");
    }

    char chunk[8192];
    ssize_t n = ::recv(sock_->fd(), chunk, sizeof(chunk), 0);
    if (n > 0) {
      buffer_.append(chunk, static_cast<std::size_t>(n));
      continue;
    }
    if (n == 0) {
      if (buffer_.empty()) return std::nullopt;
      throw NetError(NetError::Kind::kClosed, "connection closed mid-line");
    }
    if (errno == EINTR) continue;
    if (errno == EAGAIN || errno == EWOULDBLOCK) {
      if (!wait_for(sock_->fd(), POLLIN, deadline)) {
        throw NetError(NetError::Kind::kTimeout, "read timed out");
      }
      continue;
    }
    throw NetError(NetError::Kind::kClosed, errno_text("recv"));
  }
}

}  // namespace sg::net
