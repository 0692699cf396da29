#include "sg/frontend.hpp"

#include <cstdio>

#include "sg/canonical.hpp"
#include "sg/error.hpp"
#include "sg/json_fields.hpp"
#include "sg/log.hpp"
#include "sg/net.hpp"
#include "sg/rpc.hpp"

namespace sg::frontend {

namespace f = fields;

namespace {

std::vector<std::string> parse_brokers(const json& j) {
  std::vector<std::string> out;
  if (j.is_string()) {
    out.push_back(j.get<std::string>());
  } else if (j.is_array()) {
    for (const auto& b : j) out.push_back(f::as_string(b, "broker"));
  } else {
    throw ValidationError("broker", "expected an address or a list of addresses");
  }
  for (const auto& b : out) parse_endpoint(b);
  return out;
}

std::int64_t positive(const json& j, std::string_view name) {
  std::int64_t v = f::get_int(j, name);
  if (v < 1) throw ValidationError(std::string(name), "must be >= 1");
  return v;
}

}  // namespace

FrontendConfig FrontendConfig::from_json(const json& j) {
  f::require_object(j, "node config");
  FrontendConfig c;
  c.cluster_id = f::get_string(j, "cluster_id");
  if (c.cluster_id.empty()) throw ValidationError("cluster_id", "must not be empty");
  if (auto v = f::get_optional_string(j, "listen")) c.listen = *v;
  parse_endpoint(c.listen);
  if (auto v = f::get_optional_string(j, "advertise")) {
    parse_endpoint(*v);
    c.advertise = *v;
  }
  if (const json* b = f::find(j, "broker"); b != nullptr && !b->is_null()) c.brokers = parse_brokers(*b);
  if (auto v = f::get_optional_string(j, "bank")) {
    parse_endpoint(*v);
    c.bank = *v;
  }
  c.capacity_nodes = positive(j, "capacity_nodes");
  if (const json* caps = f::find(j, "capabilities")) {
    if (!caps->is_array()) throw ValidationError("capabilities", "expected an array");
    for (const auto& cap : *caps) {
      std::string token = f::as_string(cap, "capabilities");
      if (!is_feature_token(token)) throw ValidationError("capabilities", "token must match [a-z_]+");
      if (!c.capabilities.insert(token).second) throw ValidationError("capabilities", "duplicate entry");
    }
  }

  if (auto v = f::get_optional_string(j, "policy")) c.pricing.kind = pricing::parse_policy_kind(*v);
  c.pricing.base_rate = decode_money(f::require(j, "base_rate"), "base_rate");
  if (const json* lc = f::find(j, "load_coefficient")) {
    c.pricing.load_coefficient = pricing::parse_ratio(*lc, "load_coefficient");
  }
  if (const json* fm = f::find(j, "feature_multipliers")) {
    f::require_object(*fm, "feature_multipliers");
    for (const auto& [feature, ratio] : fm->items()) {
      c.pricing.feature_multipliers[feature] = pricing::parse_ratio(ratio, "feature_multipliers");
    }
  }
  pricing::validate_policy(c.pricing, c.capabilities);

  if (f::find(j, "quote_ttl_s")) c.quote_ttl_s = positive(j, "quote_ttl_s");
  if (f::find(j, "horizon_s")) c.horizon_s = positive(j, "horizon_s");
  if (auto v = f::get_optional_string(j, "clock_mode")) {
    if (*v == "virtual") {
      c.clock_mode = ClockMode::kVirtual;
    } else if (*v == "wall") {
      c.clock_mode = ClockMode::kWall;
    } else {
      throw ValidationError("clock_mode", "must be \"virtual\" or \"wall\"");
    }
  }
  if (f::find(j, "wall_ms_per_second")) c.wall_ms_per_second = positive(j, "wall_ms_per_second");
  if (const json* users = f::find(j, "users")) {
    f::require_object(*users, "users");
    for (const auto& [login, secret] : users->items()) c.users[login] = f::as_string(secret, "users");
  }
  c.payee_account = f::get_optional_string(j, "payee_account")
                        .value_or(bank::account_id_for(c.cluster_id, bank::AccountKind::kCluster));
  if (auto v = f::get_optional_string(j, "bank_secret")) c.bank_secret = *v;
  if (f::find(j, "announce_ttl_s")) {
    c.announce_ttl_s = positive(j, "announce_ttl_s");
    if (c.announce_ttl_s < 5 || c.announce_ttl_s > 3600) {
      throw ValidationError("announce_ttl_s", "must be within [5, 3600]");
    }
  }
  if (f::find(j, "announce_retry_ms")) c.announce_retry_ms = positive(j, "announce_retry_ms");
  if (f::find(j, "rpc_timeout_ms")) c.rpc_timeout_ms = positive(j, "rpc_timeout_ms");

  f::reject_unknown(j, {"cluster_id", "listen", "advertise", "broker", "bank", "capacity_nodes",
                        "capabilities", "policy", "base_rate", "load_coefficient",
                        "feature_multipliers", "quote_ttl_s", "horizon_s", "clock_mode",
                        "wall_ms_per_second", "users", "payee_account", "bank_secret",
                        "announce_ttl_s", "announce_retry_ms", "rpc_timeout_ms"});
  return c;
}

json FrontendConfig::to_json() const {
  json multipliers = json::object();
  for (const auto& [feature, r] : pricing.feature_multipliers) {
    multipliers[feature] = pricing::ratio_to_json(r);
  }
  json j{{"cluster_id", cluster_id},
         {"listen", listen},
         {"broker", brokers},
         {"capacity_nodes", capacity_nodes},
         {"capabilities", capabilities},
         {"policy", pricing::to_string(pricing.kind)},
         {"base_rate", pricing.base_rate.amount},
         {"load_coefficient", pricing::ratio_to_json(pricing.load_coefficient)},
         {"feature_multipliers", multipliers},
         {"quote_ttl_s", quote_ttl_s},
         {"horizon_s", horizon_s},
         {"clock_mode", clock_mode == ClockMode::kWall ? "wall" : "virtual"},
         {"wall_ms_per_second", wall_ms_per_second},
         {"users", users},
         {"payee_account", payee_account},
         {"bank_secret", bank_secret},
         {"announce_ttl_s", announce_ttl_s},
         {"announce_retry_ms", announce_retry_ms},
         {"rpc_timeout_ms", rpc_timeout_ms}};
  if (advertise) j["advertise"] = *advertise;
  if (!bank.empty()) j["bank"] = bank;
  return j;
}

json quote_result_to_json(const QuoteResult& r) {
  if (const Bid* bid = std::get_if<Bid>(&r)) return json{{"bid", *bid}};
  return json{{"no_bid", {{"reason", std::get<NoBid>(r).reason}}}};
}

QuoteResult quote_result_from_json(const json& j) {
  f::require_object(j, "quote");
  if (const json* bid = f::find(j, "bid")) return decode_bid(*bid);
  const json& nb = f::require(j, "no_bid");
  return NoBid{f::get_string(nb, "reason")};
}

bool LocalEscrowGateway::verify(const std::string& escrow_id,
                                const bank::EscrowExpectation& expected) {
  return bank_->verify_escrow(escrow_id, expected);
}

void LocalEscrowGateway::claim(const std::string& escrow_id, const std::string& secret) {
  bank_->claim_escrow(escrow_id, secret);
}

void LocalEscrowGateway::settle(const std::string& escrow_id, bank::Outcome outcome,
                                const std::string& secret) {
  bank_->settle_escrow(escrow_id, outcome, secret);
}

RpcEscrowGateway::RpcEscrowGateway(std::string address, std::chrono::milliseconds timeout)
  : client_(std::move(address), timeout) {}

namespace {

template <typename Fn>
auto translate_remote(Fn&& fn) {
  try {
    return fn();
  } catch (const rpc::RpcError& e) {
    if (e.code() == rpc::RpcErrorCode::kApplicationError) {
      const std::string& msg = e.message();
      auto pos = msg.find(": ");
      throw Error(e.kind(), pos == std::string::npos ? "" : msg.substr(pos + 2));
    }
    throw;
  }
}

}  // namespace

bool RpcEscrowGateway::verify(const std::string& escrow_id,
                              const bank::EscrowExpectation& expected) {
  return translate_remote([&] { return client_.verify_escrow(escrow_id, expected); });
}

void RpcEscrowGateway::claim(const std::string& escrow_id, const std::string& secret) {
  translate_remote([&] { client_.claim_escrow(escrow_id, secret); });
}

void RpcEscrowGateway::settle(const std::string& escrow_id, bank::Outcome outcome,
                              const std::string& secret) {
  translate_remote([&] { client_.settle_escrow(escrow_id, outcome, secret); });
}

Frontend::Frontend(FrontendConfig config, std::shared_ptr<EscrowGateway> escrow)
  : config_(std::move(config)),
    escrow_(std::move(escrow)),
    scheduler_(config_.capacity_nodes),
    address_(config_.advertise.value_or(config_.listen)) {
  pricing::validate_policy(config_.pricing, config_.capabilities);
}

std::string Frontend::mint_token(const std::string& job_id) {
  json seed{{"cluster_id", config_.cluster_id},
            {"job_id", job_id},
            {"seq", ++quote_seq_},
            {"clock", scheduler_.clock()}};
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_dump(seed))));
  return config_.cluster_id + "-" + std::to_string(quote_seq_) + "-" + hex;
}

void Frontend::purge_expired_quotes() {
  for (auto it = quotes_.begin(); it != quotes_.end();) {
    if (!it->second.pending && it->second.expires_at <= scheduler_.clock()) {
      it = quotes_.erase(it);
    } else {
      ++it;
    }
  }
}

pricing::Load Frontend::current_load() const {
  std::lock_guard lock(mu_);
  return pricing::Load{scheduler_.committed_node_seconds(), config_.capacity_nodes,
                       config_.horizon_s};
}

QuoteResult Frontend::quote(const JobSpec& spec) {
  for (const auto& feature : spec.required_features) {
    if (!config_.capabilities.contains(feature)) return NoBid{"unsupported_feature"};
  }
  if (spec.nodes > config_.capacity_nodes) return NoBid{"insufficient_capacity"};

  std::lock_guard lock(mu_);
  pricing::Load load{scheduler_.committed_node_seconds(), config_.capacity_nodes,
                     config_.horizon_s};
  auto price = pricing::compute_price(config_.pricing, spec.nodes, spec.walltime_s,
                                      spec.required_features, load);
  if (!price) return NoBid{"price_overflow"};
  if (spec.max_price && *price > *spec.max_price) return NoBid{"over_max_price"};

  purge_expired_quotes();
  QuoteRecord rec;
  rec.bid_token = mint_token(spec.job_id);
  rec.job_id = spec.job_id;
  rec.price = *price;
  rec.expires_at = scheduler_.clock() + config_.quote_ttl_s;
  rec.spec_bytes = canonical_encode(spec);
  Bid bid{config_.cluster_id, rec.price, rec.bid_token, rec.expires_at};
  quotes_.emplace(rec.bid_token, std::move(rec));
  return bid;
}

JobStatus Frontend::submit(const JobSpec& spec, const std::string& bid_token,
                           const std::string& escrow_id) {
  Money price;
  {
    std::lock_guard lock(mu_);
    auto it = quotes_.find(bid_token);
    if (it == quotes_.end() || it->second.pending || it->second.job_id != spec.job_id) {
      throw Error("UnknownQuote", "no live quote " + bid_token + " for job " + spec.job_id);
    }
    if (scheduler_.clock() >= it->second.expires_at) {
      quotes_.erase(it);
      throw Error("QuoteExpired", bid_token);
    }
    if (it->second.spec_bytes != canonical_encode(spec)) {
      throw Error("UnknownQuote", "job specification differs from the quoted one");
    }
    auto user = config_.users.find(spec.user);
    if (user == config_.users.end() || user->second != spec.secret) {
      throw Error("AuthFailed", "bad credentials for user " + spec.user);
    }
    if (scheduler_.knows(spec.job_id)) throw Error("DuplicateJob", spec.job_id);
    it->second.pending = true;
    price = it->second.price;
  }

  auto release = [&] {
    std::lock_guard lock(mu_);
    if (auto it = quotes_.find(bid_token); it != quotes_.end()) it->second.pending = false;
  };

  try {
    if (!escrow_) throw Error("EscrowInvalid", "no bank configured");
    if (!escrow_->verify(escrow_id, {config_.payee_account, spec.job_id, price})) {
      throw Error("EscrowInvalid", escrow_id + " does not cover job " + spec.job_id + " at " +
                                       std::to_string(price.amount));
    }
    try {
      escrow_->claim(escrow_id, config_.bank_secret);
    } catch (const Error& e) {
      throw Error("EscrowInvalid", e.what());
    }
  } catch (...) {
    release();
    throw;
  }

  std::lock_guard lock(mu_);
  quotes_.erase(bid_token);
  scheduler_.submit(spec.job_id, spec.nodes, spec.walltime_s);
  escrow_by_job_[spec.job_id] = escrow_id;
  return *scheduler_.status(spec.job_id);
}

std::vector<sched::LifecycleEvent> Frontend::tick(Seconds dt) {
  std::vector<sched::LifecycleEvent> events;
  {
    std::lock_guard lock(mu_);
    events = scheduler_.tick(dt);
    for (const auto& ev : events) {
      if (ev.state != JobState::kCompleted) continue;
      auto it = escrow_by_job_.find(ev.job_id);
      if (it != escrow_by_job_.end()) pending_.push_back(Settlement{ev.job_id, it->second});
    }
  }
  drain_settlements();
  return events;
}

void Frontend::drain_settlements() {
  if (!escrow_) return;
  std::lock_guard settle_lock(settle_mu_);
  std::vector<Settlement> batch;
  {
    std::lock_guard lock(mu_);
    batch.swap(pending_);
  }
  std::vector<Settlement> retry;
  for (const auto& s : batch) {
    try {
      escrow_->settle(s.escrow_id, bank::Outcome::kCompleted, config_.bank_secret);
    } catch (const Error& e) {
      // A retried settlement that the bank already applied is done.
      if (e.kind() != "AlreadySettled") {
        log::error("settlement of " + s.escrow_id + " rejected: " + e.what());
      }
    } catch (const std::exception& e) {
      log::warn("settlement of " + s.escrow_id + " deferred: " + e.what());
      retry.push_back(s);
    }
  }
  if (!retry.empty()) {
    std::lock_guard lock(mu_);
    pending_.insert(pending_.begin(), retry.begin(), retry.end());
  }
}

JobStatus Frontend::status(const std::string& job_id) const {
  std::lock_guard lock(mu_);
  auto st = scheduler_.status(job_id);
  if (!st) throw Error("UnknownJob", job_id);
  return *st;
}

ClusterDescriptor Frontend::describe() const {
  std::lock_guard lock(mu_);
  return ClusterDescriptor{config_.cluster_id, address_, config_.capacity_nodes,
                           config_.capabilities, config_.pricing.base_rate,
                           config_.payee_account};
}

void Frontend::set_address(std::string address) {
  std::lock_guard lock(mu_);
  address_ = std::move(address);
}

Seconds Frontend::clock() const {
  std::lock_guard lock(mu_);
  return scheduler_.clock();
}

std::size_t Frontend::pending_settlements() const {
  std::lock_guard lock(mu_);
  return pending_.size();
}

}  // namespace sg::frontend
