#include "sg/broker.hpp"

#include <algorithm>
#include <mutex>
#include <thread>

#include "sg/canonical.hpp"
#include "sg/json_fields.hpp"
#include "sg/rpc.hpp"

namespace sg::broker {

namespace f = fields;

void to_json(json& j, const Selection& s) {
  j = json{{"cluster_id", s.cluster_id}, {"address", s.address},
           {"price", s.price.amount},    {"bid_token", s.bid_token},
           {"payee_account", s.payee_account}, {"expires_at", s.expires_at}};
}

Selection decode_selection(const json& j) {
  f::require_object(j, "selection");
  return Selection{f::get_string(j, "cluster_id"),
                   f::get_string(j, "address"),
                   decode_money(f::require(j, "price"), "price"),
                   f::get_string(j, "bid_token"),
                   f::get_string(j, "payee_account"),
                   f::get_int(j, "expires_at")};
}

NoEligibleCluster::NoEligibleCluster(std::map<std::string, std::string> reasons)
  : Error("NoEligibleCluster", canonical_dump(json(reasons))), reasons_(std::move(reasons)) {}

std::map<std::string, std::string> NoEligibleCluster::parse_reasons(const std::string& message) {
  std::map<std::string, std::string> out;
  auto pos = message.find(": ");
  if (pos == std::string::npos) return out;
  json j = json::parse(message.substr(pos + 2), nullptr, false);
  if (!j.is_object()) return out;
  for (const auto& [k, v] : j.items()) {
    if (v.is_string()) out[k] = v.get<std::string>();
  }
  return out;
}

std::optional<std::size_t> select_winner(std::span<const Bid> bids) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < bids.size(); ++i) {
    if (!best) {
      best = i;
      continue;
    }
    const Bid& a = bids[i];
    const Bid& b = bids[*best];
    if (a.price < b.price || (a.price == b.price && a.cluster_id < b.cluster_id)) best = i;
  }
  return best;
}

QuoteFn rpc_quote_fn() {
  return [](const std::string& address, const JobSpec& spec, std::chrono::milliseconds timeout) {
    return rpc::rpc_call(address, "node.quote", json{{"spec", spec}}, timeout);
  };
}

BrokerConfig BrokerConfig::from_json(const json& j) {
  f::require_object(j, "broker config");
  BrokerConfig c;
  if (auto v = f::get_optional_string(j, "listen")) c.listen = *v;
  parse_endpoint(c.listen);
  if (auto v = f::get_optional_int(j, "bid_timeout_ms")) {
    if (*v < 1) throw ValidationError("bid_timeout_ms", "must be >= 1");
    c.bid_timeout_ms = *v;
  }
  if (auto v = f::get_optional_int(j, "default_ttl_s")) {
    if (*v < 5 || *v > 3600) throw ValidationError("default_ttl_s", "must be within [5, 3600]");
    c.default_ttl_s = *v;
  }
  f::reject_unknown(j, {"listen", "bid_timeout_ms", "default_ttl_s"});
  return c;
}

Broker::Broker(BrokerConfig config, std::shared_ptr<const TimeSource> clock, QuoteFn quote)
  : config_(std::move(config)), clock_(std::move(clock)), quote_(std::move(quote)) {}

void Broker::register_cluster(const ClusterDescriptor& descriptor, std::optional<Seconds> ttl_s) {
  Seconds ttl = ttl_s.value_or(config_.default_ttl_s);
  if (ttl < 5 || ttl > 3600) throw ValidationError("ttl_s", "must be within [5, 3600]");
  std::unique_lock lock(mu_);
  registry_[descriptor.cluster_id] = Registration{descriptor, clock_->now(), ttl};
}

std::vector<ClusterDescriptor> Broker::list_clusters() const {
  Seconds now = clock_->now();
  std::shared_lock lock(mu_);
  std::vector<ClusterDescriptor> out;
  for (const auto& [_, reg] : registry_) {
    if (!reg.expired(now)) out.push_back(reg.descriptor);
  }
  return out;
}

namespace {

struct Outcome {
  std::optional<Bid> bid;
  std::string reason;
};

Outcome interpret(const ClusterDescriptor& d, const json& reply) {
  try {
    f::require_object(reply, "quote");
    if (const json* nb = f::find(reply, "no_bid")) {
      return {std::nullopt, "no_bid:" + f::get_string(*nb, "reason")};
    }
    Bid bid = decode_bid(f::require(reply, "bid"));
    if (bid.cluster_id != d.cluster_id) return {std::nullopt, "error:cluster_id mismatch"};
    return {bid, ""};
  } catch (const std::exception& e) {
    return {std::nullopt, std::string("error:") + e.what()};
  }
}

}  // namespace

Selection Broker::find_cluster(const JobSpec& spec) const {
  std::vector<ClusterDescriptor> live = list_clusters();
  if (live.empty()) throw NoEligibleCluster({});

  auto timeout = std::chrono::milliseconds(config_.bid_timeout_ms);
  std::vector<Outcome> outcomes(live.size());
  {
    std::vector<std::jthread> workers;
    workers.reserve(live.size());
    for (std::size_t i = 0; i < live.size(); ++i) {
      workers.emplace_back([&, i] {
        try {
          outcomes[i] = interpret(live[i], quote_(live[i].address, spec, timeout));
        } catch (const rpc::RpcError& e) {
          outcomes[i].reason = e.code() == rpc::RpcErrorCode::kTimeout
                                   ? "timeout"
                                   : std::string("error:") + e.what();
        } catch (const std::exception& e) {
          outcomes[i].reason = std::string("error:") + e.what();
        }
      });
    }
  }

  std::vector<Bid> bids;
  std::vector<std::size_t> origin;
  std::map<std::string, std::string> reasons;
  for (std::size_t i = 0; i < live.size(); ++i) {
    if (outcomes[i].bid) {
      bids.push_back(*outcomes[i].bid);
      origin.push_back(i);
    } else {
      reasons[live[i].cluster_id] = outcomes[i].reason;
    }
  }

  auto winner = select_winner(bids);
  if (!winner) throw NoEligibleCluster(std::move(reasons));
  const Bid& bid = bids[*winner];
  const ClusterDescriptor& d = live[origin[*winner]];
  return Selection{d.cluster_id, d.address, bid.price, bid.bid_token, d.payee_account,
                   bid.expires_at};
}

}  // namespace sg::broker
