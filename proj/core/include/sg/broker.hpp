#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sg/clock.hpp"
#include "sg/domain.hpp"
#include "sg/error.hpp"

namespace sg::broker {

using nlohmann::json;

struct Registration {
  ClusterDescriptor descriptor;
  Seconds registered_at{0};
  Seconds ttl_s{30};

  bool expired(Seconds now) const { return now > registered_at + ttl_s; }
};

struct Selection {
  std::string cluster_id;
  std::string address;
  Money price;
  std::string bid_token;
  std::string payee_account;
  Seconds expires_at{0};

  friend bool operator==(const Selection&, const Selection&) = default;
};

void to_json(json& j, const Selection& s);
Selection decode_selection(const json& j);

/// No live cluster produced a usable bid. reasons maps cluster_id to why it
/// was excluded ("no_bid:<reason>", "timeout", "error:<detail>", ...).
class NoEligibleCluster : public Error {
public:
  explicit NoEligibleCluster(std::map<std::string, std::string> reasons);
  const std::map<std::string, std::string>& reasons() const { return reasons_; }

  /// Recovers the reasons map from a what() string produced by this class.
  static std::map<std::string, std::string> parse_reasons(const std::string& message);

private:
  std::map<std::string, std::string> reasons_;
};

/// Index of the cheapest bid, ties going to the bytewise-smallest cluster_id.
std::optional<std::size_t> select_winner(std::span<const Bid> bids);

/// Asks one cluster for a quote. Returns the raw node.quote result.
using QuoteFn = std::function<json(const std::string& address, const JobSpec& spec,
                                   std::chrono::milliseconds timeout)>;

/// QuoteFn backed by rpc_call.
QuoteFn rpc_quote_fn();

struct BrokerConfig {
  std::string listen{"127.0.0.1:7701"};
  std::int64_t bid_timeout_ms{2000};
  Seconds default_ttl_s{30};

  static BrokerConfig from_json(const json& j);
};

/// Cluster registry plus single-shot sealed-bid selection.
class Broker {
public:
  Broker(BrokerConfig config, std::shared_ptr<const TimeSource> clock,
         QuoteFn quote = rpc_quote_fn());

  /// Upserts by cluster_id. Throws ValidationError for ttl outside [5, 3600].
  void register_cluster(const ClusterDescriptor& descriptor, std::optional<Seconds> ttl_s);

  /// Live registrations sorted by cluster_id.
  std::vector<ClusterDescriptor> list_clusters() const;

  /// Quotes every live cluster concurrently, each bounded by bid_timeout_ms,
  /// and returns the cheapest bid. Mutates nothing.
  Selection find_cluster(const JobSpec& spec) const;

  const BrokerConfig& config() const { return config_; }

private:
  BrokerConfig config_;
  std::shared_ptr<const TimeSource> clock_;
  QuoteFn quote_;
  mutable std::shared_mutex mu_;
  std::map<std::string, Registration> registry_;
};

}  // namespace sg::broker
