#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "sg/error.hpp"
#include "sg/net.hpp"
#include "sg/wire.hpp"

namespace sg::rpc {

using nlohmann::json;
using wire::RpcErrorCode;

/// Failure of a remote call: either reported by the peer or produced locally
/// (timeouts, refused connections, framing failures).
class RpcError : public std::runtime_error {
public:
  RpcError(RpcErrorCode code, std::string message)
    : std::runtime_error(std::string(wire::to_string(code)) + ": " + message),
      code_(code),
      message_(std::move(message)) {}

  RpcErrorCode code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }

  /// Application error kind carried in the message ("Kind: detail").
  std::string kind() const { return error_kind_of(message_); }

private:
  RpcErrorCode code_;
  std::string message_;
};

/// Thrown by handlers whose params do not decode; answered with code 3.
class InvalidParams : public Error {
public:
  explicit InvalidParams(const std::string& detail) : Error("InvalidParams", detail) {}
};

using Handler = std::function<json(const json& params)>;
using HandlerMap = std::map<std::string, Handler, std::less<>>;

/// One request over a fresh connection. Connection refusal surfaces as
/// TIMEOUT, as does any response that is not complete within `timeout`.
json rpc_call(const std::string& address, std::string_view method, const json& params,
              std::chrono::milliseconds timeout);

/// A persistent connection to one address, reopened on demand after errors.
/// Not thread-safe: one request in flight at a time.
class RpcChannel {
public:
  explicit RpcChannel(std::string address) : address_(std::move(address)) {}

  json call(std::string_view method, const json& params, std::chrono::milliseconds timeout);
  const std::string& address() const noexcept { return address_; }

private:
  std::string address_;
  net::Socket sock_;
  std::unique_ptr<net::LineReader> reader_;
  std::uint64_t next_id_{1};
};

/// Dispatches a single decoded request; exposed for in-process testing.
wire::RpcResponse dispatch(const HandlerMap& handlers, const wire::RpcRequest& request);

/// A running service. Connections are served concurrently, one request in
/// flight per connection. stop() finishes in-flight requests before returning.
class Server {
public:
  Server(const std::string& bind, HandlerMap handlers);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const noexcept { return port_; }
  /// Loopback-reachable "host:port" for this server.
  std::string address() const;

  void stop();

private:
  struct Connection {
    net::Socket sock;
    std::thread worker;
    std::atomic<bool> done{false};
  };

  void accept_loop();
  void serve_connection(Connection& conn);
  void reap_finished();

  std::string host_;
  HandlerMap handlers_;
  net::Socket listener_;
  std::uint16_t port_{0};
  std::atomic<bool> stopping_{false};
  std::mutex conns_mu_;
  std::list<std::unique_ptr<Connection>> conns_;
  std::thread acceptor_;
  std::once_flag stop_once_;
};

std::unique_ptr<Server> serve(const std::string& bind, HandlerMap handlers);

}  // namespace sg::rpc
