#include "sg/frontend_service.hpp"

#include "sg/error.hpp"
#include "sg/json_fields.hpp"
#include "sg/log.hpp"

namespace sg::frontend {

namespace f = fields;

rpc::HandlerMap make_handlers(Frontend& node, bool allow_tick, std::function<void()> after_tick) {
  rpc::HandlerMap h;
  h["ping"] = [](const json&) { return json(true); };
  h["node.quote"] = [&node](const json& p) {
    return quote_result_to_json(node.quote(validate_jobspec(f::require(p, "spec"))));
  };
  h["node.submit"] = [&node](const json& p) {
    JobSpec spec = validate_jobspec(f::require(p, "spec"));
    return json(node.submit(spec, f::get_string(p, "bid_token"), f::get_string(p, "escrow_id")));
  };
  h["node.status"] = [&node](const json& p) {
    return json(node.status(f::get_string(p, "job_id")));
  };
  h["node.describe"] = [&node](const json&) { return json(node.describe()); };
  h["node.tick"] = [&node, allow_tick, after_tick](const json& p) {
    if (!allow_tick) throw Error("WallClockMode", "node.tick is only available in virtual mode");
    Seconds dt = f::get_int(p, "dt");
    if (dt < 0) throw rpc::InvalidParams("dt must be >= 0");
    auto events = node.tick(dt);
    if (after_tick) after_tick();
    return json{{"events", events}, {"clock", node.clock()}};
  };
  return h;
}

FrontendService::FrontendService(FrontendConfig config, std::shared_ptr<EscrowGateway> escrow)
  : config_(std::move(config)) {
  if (!escrow && !config_.bank.empty()) {
    escrow = std::make_shared<RpcEscrowGateway>(config_.bank,
                                                std::chrono::milliseconds(config_.rpc_timeout_ms));
  }
  node_ = std::make_unique<Frontend>(config_, std::move(escrow));

  bool is_virtual = config_.clock_mode == ClockMode::kVirtual;
  server_ = rpc::serve(config_.listen,
                       make_handlers(*node_, is_virtual, [this] { after_tick(); }));
  node_->set_address(config_.advertise.value_or(server_->address()));

  if (is_virtual) {
    if (announce_once()) {
      next_announce_at_ = node_->clock() + std::max<Seconds>(1, config_.announce_ttl_s / 2);
    } else {
      log::warn(config_.cluster_id + ": initial announce failed; will retry");
    }
  } else {
    announcer_ = std::thread([this] { announcer_loop(); });
    ticker_ = std::thread([this] { ticker_loop(); });
  }
}

FrontendService::~FrontendService() { stop(); }

void FrontendService::stop() {
  {
    std::lock_guard lock(stop_mu_);
    if (stopping_) return;
    stopping_ = true;
  }
  stop_cv_.notify_all();
  if (announcer_.joinable()) announcer_.join();
  if (ticker_.joinable()) ticker_.join();
  server_->stop();
}

bool FrontendService::announce_once() {
  json params{{"descriptor", node_->describe()}, {"ttl_s", config_.announce_ttl_s}};
  bool ok = true;
  for (const auto& broker : config_.brokers) {
    try {
      rpc::rpc_call(broker, "broker.register_cluster", params,
                    std::chrono::milliseconds(config_.rpc_timeout_ms));
    } catch (const std::exception& e) {
      log::warn(config_.cluster_id + ": announce to " + broker + " failed: " + e.what());
      ok = false;
    }
  }
  return ok;
}

void FrontendService::after_tick() {
  std::lock_guard lock(announce_mu_);
  Seconds now = node_->clock();
  if (now < next_announce_at_) return;
  bool ok = announce_once();
  next_announce_at_ = ok ? now + std::max<Seconds>(1, config_.announce_ttl_s / 2) : now + 1;
}

void FrontendService::announcer_loop() {
  std::unique_lock lock(stop_mu_);
  while (!stopping_) {
    lock.unlock();
    bool ok = announce_once();
    lock.lock();
    auto wait = ok ? std::chrono::milliseconds(config_.announce_ttl_s * 1000 / 2)
                   : std::chrono::milliseconds(config_.announce_retry_ms);
    stop_cv_.wait_for(lock, wait, [this] { return stopping_; });
  }
}

void FrontendService::ticker_loop() {
  auto period = std::chrono::milliseconds(config_.wall_ms_per_second);
  auto next = std::chrono::steady_clock::now() + period;
  std::unique_lock lock(stop_mu_);
  while (!stopping_) {
    if (stop_cv_.wait_until(lock, next, [this] { return stopping_; })) break;
    lock.unlock();
    node_->tick(1);
    lock.lock();
    next += period;
  }
}

}  // namespace sg::frontend
