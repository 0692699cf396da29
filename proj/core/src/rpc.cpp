#include "sg/rpc.hpp"

#include "sg/log.hpp"

namespace sg::rpc {

namespace {

std::atomic<std::uint64_t> g_call_counter{1};

json exchange(const net::Socket& sock, net::LineReader& reader, const std::string& id,
              std::string_view method, const json& params, net::Clock::time_point deadline) {
  std::string line =
      wire::encode_message(wire::RpcRequest{id, std::string(method), params});
  net::send_all(sock, line, deadline);
  auto reply = reader.read_line(deadline);
  if (!reply) throw RpcError(RpcErrorCode::kTimeout, "connection closed before reply");

  wire::RpcMessage msg;
  try {
    msg = wire::decode_message(*reply);
  } catch (const wire::FramingError& e) {
    throw RpcError(RpcErrorCode::kMalformed, e.what());
  }
  auto* resp = std::get_if<wire::RpcResponse>(&msg);
  if (resp == nullptr) throw RpcError(RpcErrorCode::kMalformed, "peer sent a request");
  if (resp->is_error()) {
    throw RpcError(resp->error().code, resp->error().message);
  }
  if (resp->id != id) throw RpcError(RpcErrorCode::kMalformed, "response id mismatch");
  return resp->result();
}

RpcError from_net(const net::NetError& e) {
  // Refused, reset and timed-out connections all look like silence to callers.
  return RpcError(RpcErrorCode::kTimeout, e.what());
}

}  // namespace

json rpc_call(const std::string& address, std::string_view method, const json& params,
              std::chrono::milliseconds timeout) {
  if (timeout.count() <= 0) throw std::invalid_argument("rpc_call timeout must be positive");
  auto deadline = net::Clock::now() + timeout;
  std::string id = std::to_string(g_call_counter.fetch_add(1));
  try {
    net::Socket sock = net::connect_to(parse_endpoint(address), deadline);
    net::LineReader reader(sock);
    return exchange(sock, reader, id, method, params, deadline);
  } catch (const net::NetError& e) {
    throw from_net(e);
  }
}

json RpcChannel::call(std::string_view method, const json& params,
                      std::chrono::milliseconds timeout) {
  if (timeout.count() <= 0) throw std::invalid_argument("rpc timeout must be positive");
  auto deadline = net::Clock::now() + timeout;
  std::string id = std::to_string(next_id_++);
  try {
    if (!sock_.valid()) {
      sock_ = net::connect_to(parse_endpoint(address_), deadline);
      reader_ = std::make_unique<net::LineReader>(sock_);
    }
    return exchange(sock_, *reader_, id, method, params, deadline);
  } catch (const net::NetError& e) {
    sock_.close();
    reader_.reset();
    throw from_net(e);
  } catch (const RpcError& e) {
    // Remote application errors leave the connection usable; anything else
    // may have desynchronised the stream.
    if (e.code() == RpcErrorCode::kMalformed || e.code() == RpcErrorCode::kTimeout) {
      sock_.close();
      reader_.reset();
    }
    throw;
  }
}

wire::RpcResponse dispatch(const HandlerMap& handlers, const wire::RpcRequest& request) {
  auto it = handlers.find(request.method);
  if (it == handlers.end()) {
    return wire::RpcResponse::failure(request.id, RpcErrorCode::kUnknownMethod,
                                      "no such method: " + request.method);
  }
  try {
    return wire::RpcResponse::success(request.id, it->second(request.params));
  } catch (const InvalidParams& e) {
    return wire::RpcResponse::failure(request.id, RpcErrorCode::kInvalidParams, e.what());
  } catch (const ValidationError& e) {
    return wire::RpcResponse::failure(request.id, RpcErrorCode::kInvalidParams, e.what());
  } catch (const json::exception& e) {
    return wire::RpcResponse::failure(request.id, RpcErrorCode::kInvalidParams,
                                      std::string("InvalidParams: ") + e.what());
  } catch (const RpcError& e) {
    // A downstream call failed while handling this request.
    return wire::RpcResponse::failure(request.id, RpcErrorCode::kApplicationError,
                                      "UpstreamError: " + std::string(e.what()));
  } catch (const std::exception& e) {
    return wire::RpcResponse::failure(request.id, RpcErrorCode::kApplicationError, e.what());
  }
}

Server::Server(const std::string& bind, HandlerMap handlers) : handlers_(std::move(handlers)) {
  net::Endpoint ep = parse_endpoint(bind);
  host_ = (ep.host.empty() || ep.host == "0.0.0.0" || ep.host == "*") ? "127.0.0.1" : ep.host;
  listener_ = net::listen_on(ep);
  port_ = listener_.local_port();
  acceptor_ = std::thread([this] { accept_loop(); });
}

Server::~Server() { stop(); }

std::string Server::address() const { return host_ + ":" + std::to_string(port_); }

void Server::stop() {
  std::call_once(stop_once_, [this] {
    stopping_ = true;
    listener_.shutdown_both();
    if (acceptor_.joinable()) acceptor_.join();
    listener_.close();

    std::list<std::unique_ptr<Connection>> conns;
    {
      std::lock_guard lock(conns_mu_);
      conns.swap(conns_);
    }
    // Stop reading new requests; a handler already running still writes its reply.
    for (auto& c : conns) c->sock.shutdown_read();
    for (auto& c : conns) {
      if (c->worker.joinable()) c->worker.join();
    }
  });
}

void Server::reap_finished() {
  std::lock_guard lock(conns_mu_);
  for (auto it = conns_.begin(); it != conns_.end();) {
    if ((*it)->done) {
      (*it)->worker.join();
      it = conns_.erase(it);
    } else {
      ++it;
    }
  }
}

void Server::accept_loop() {
  while (!stopping_) {
    net::Socket sock = net::accept_from(listener_);
    if (!sock.valid()) break;
    reap_finished();

    std::lock_guard lock(conns_mu_);
    if (stopping_) break;
    auto conn = std::make_unique<Connection>();
    conn->sock = std::move(sock);
    Connection& ref = *conn;
    conns_.push_back(std::move(conn));
    ref.worker = std::thread([this, &ref] {
      serve_connection(ref);
      ref.done = true;
    });
  }
}

void Server::serve_connection(Connection& conn) {
  net::LineReader reader(conn.sock);
  try {
    for (;;) {
      auto line = reader.read_line(std::nullopt);
      if (!line) return;

      wire::RpcResponse response;
      try {
        auto msg = wire::decode_message(*line);
        auto* request = std::get_if<wire::RpcRequest>(&msg);
        if (request == nullptr) {
          response = wire::RpcResponse::failure(std::get<wire::RpcResponse>(msg).id,
                                                RpcErrorCode::kMalformed, "expected a request");
        } else {
          response = dispatch(handlers_, *request);
        }
      } catch (const wire::FramingError& e) {
        response = wire::RpcResponse::failure("", RpcErrorCode::kMalformed, e.what());
      }

      std::string bytes;
      try {
        bytes = wire::encode_message(response);
      } catch (const json::exception& e) {
        bytes = wire::encode_message(wire::RpcResponse::failure(
            response.id, RpcErrorCode::kApplicationError, "unencodable result"));
      }
      net::send_all(conn.sock, bytes, std::nullopt);
    }
  } catch (const net::NetError& e) {
    if (!stopping_) log::debug(std::string("connection dropped: ") + e.what());
  }
}

std::unique_ptr<Server> serve(const std::string& bind, HandlerMap handlers) {
  return std::make_unique<Server>(bind, std::move(handlers));
}

}  // namespace sg::rpc
