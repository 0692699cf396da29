#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sg/domain.hpp"

namespace sg::harness {

using nlohmann::json;

struct ScenarioUser {
  std::string account;  ///< login name; the bank account is user:<account>
  std::int64_t initial_deposit{0};
  std::string secret;   ///< defaults to "secret-<account>"
};

struct WorkloadItem {
  Seconds submit_at{0};
  std::string user;
  /// JobSpec fields without job_id/user/secret, which the user's client fills in.
  json spec = json::object();
};

struct Scenario {
  /// Front-end config records; the harness supplies listen, broker, bank,
  /// clock_mode, users, bank_secret and payee_account.
  std::vector<json> clusters;
  std::vector<ScenarioUser> users;
  std::vector<WorkloadItem> workload;
  Seconds duration_s{0};
  std::uint64_t seed{0};
  std::int64_t bid_timeout_ms{2000};
  Seconds registration_ttl_s{30};

  /// Throws ValidationError (reported as ScenarioInvalid by the CLI).
  static Scenario from_json(const json& j);
  json to_json() const;
  void validate() const;
};

struct PricePoint {
  Seconds time{0};
  std::string cluster_id;
  Money price;

  friend bool operator==(const PricePoint&, const PricePoint&) = default;
};

struct MarketReport {
  std::map<std::string, std::int64_t> jobs_per_cluster;
  std::vector<PricePoint> price_series;
  std::map<std::string, Money> final_balances;
  bool conservation_ok{true};
  bool all_jobs_terminal{true};
  /// Submissions that did not produce a receipt: (time, user, error kind).
  std::vector<json> errors;

  json to_json() const;
  static MarketReport from_json(const json& j);
  friend bool operator==(const MarketReport&, const MarketReport&) = default;
};

/// Boots bank, broker and one virtual-clock front-end per cluster on loopback
/// sockets, then for each virtual second t in [0, duration_s): delivers the
/// submissions due at t in workload order, and ticks every front-end by one.
/// Conservation is audited every 10 virtual seconds and at the end.
MarketReport run_scenario(const Scenario& scenario);

/// Runs the scenario twice; true iff the canonical reports are byte-identical.
bool replay_check(const Scenario& scenario);

}  // namespace sg::harness
