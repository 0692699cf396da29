#pragma once

#include <atomic>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <thread>

#include "sg/frontend.hpp"
#include "sg/rpc.hpp"

namespace sg::frontend {

/// Handlers for node.quote, node.submit, node.status, node.describe, ping and,
/// when `allow_tick` is set, node.tick.
rpc::HandlerMap make_handlers(Frontend& node, bool allow_tick,
                              std::function<void()> after_tick = {});

/// A front-end bound to its listen address.
///
/// Virtual mode: time moves only through node.tick; registrations with the
/// brokers are refreshed from the tick path every announce_ttl_s / 2 virtual
/// seconds (and retried on the next tick after a failure).
/// Wall mode: a ticker thread advances one virtual second per
/// wall_ms_per_second, and an announcer thread refreshes registrations every
/// announce_ttl_s / 2 wall seconds, retrying every announce_retry_ms.
class FrontendService {
public:
  /// Uses an RPC gateway to config.bank unless `escrow` is given.
  explicit FrontendService(FrontendConfig config, std::shared_ptr<EscrowGateway> escrow = nullptr);
  ~FrontendService();
  FrontendService(const FrontendService&) = delete;
  FrontendService& operator=(const FrontendService&) = delete;

  Frontend& node() { return *node_; }
  std::string address() const { return server_->address(); }

  /// Sends the descriptor to every configured broker; true if all accepted.
  bool announce_once();

  void stop();

private:
  void after_tick();
  void announcer_loop();
  void ticker_loop();

  FrontendConfig config_;
  std::unique_ptr<Frontend> node_;
  std::unique_ptr<rpc::Server> server_;

  std::mutex announce_mu_;
  Seconds next_announce_at_{0};

  std::mutex stop_mu_;
  std::condition_variable stop_cv_;
  bool stopping_{false};
  std::thread announcer_;
  std::thread ticker_;
};

}  // namespace sg::frontend
