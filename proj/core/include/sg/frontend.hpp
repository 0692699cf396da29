#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "sg/bank.hpp"
#include "sg/bank_service.hpp"
#include "sg/domain.hpp"
#include "sg/pricing.hpp"
#include "sg/scheduler.hpp"

namespace sg::frontend {

using nlohmann::json;

enum class ClockMode { kVirtual, kWall };

struct FrontendConfig {
  std::string cluster_id;
  std::string listen{"127.0.0.1:7710"};
  /// Address announced to brokers; defaults to the bound listen address.
  std::optional<std::string> advertise;
  std::vector<std::string> brokers;
  std::string bank;
  std::int64_t capacity_nodes{1};
  std::set<std::string> capabilities;
  pricing::PricingPolicy pricing;
  Seconds quote_ttl_s{60};
  Seconds horizon_s{3600};
  ClockMode clock_mode{ClockMode::kVirtual};
  /// Wall milliseconds per virtual second in wall-clock mode.
  std::int64_t wall_ms_per_second{1000};
  std::map<std::string, std::string> users;
  std::string payee_account;
  /// Secret this cluster presents to the bank when claiming or settling.
  std::string bank_secret;
  Seconds announce_ttl_s{30};
  std::int64_t announce_retry_ms{500};
  std::int64_t rpc_timeout_ms{5000};

  /// Parses and validates the JSON config file layout.
  static FrontendConfig from_json(const json& j);
  json to_json() const;
};

/// Refusal to price a job. reason is one of "unsupported_feature",
/// "insufficient_capacity", "over_max_price", "price_overflow".
struct NoBid {
  std::string reason;
  friend bool operator==(const NoBid&, const NoBid&) = default;
};

using QuoteResult = std::variant<Bid, NoBid>;

struct QuoteRecord {
  std::string bid_token;
  std::string job_id;
  Money price;
  Seconds expires_at{0};
  std::string spec_bytes;
  bool pending{false};
};

/// The bank operations a front-end depends on.
class EscrowGateway {
public:
  virtual ~EscrowGateway() = default;
  virtual bool verify(const std::string& escrow_id, const bank::EscrowExpectation& expected) = 0;
  virtual void claim(const std::string& escrow_id, const std::string& secret) = 0;
  virtual void settle(const std::string& escrow_id, bank::Outcome outcome,
                      const std::string& secret) = 0;
};

/// Calls a Bank object directly.
class LocalEscrowGateway : public EscrowGateway {
public:
  explicit LocalEscrowGateway(bank::Bank& bank) : bank_(&bank) {}
  bool verify(const std::string& escrow_id, const bank::EscrowExpectation& expected) override;
  void claim(const std::string& escrow_id, const std::string& secret) override;
  void settle(const std::string& escrow_id, bank::Outcome outcome,
              const std::string& secret) override;

private:
  bank::Bank* bank_;
};

/// Talks to a bank service over RPC. Remote application errors are rethrown
/// as sg::Error; transport failures propagate as rpc::RpcError.
class RpcEscrowGateway : public EscrowGateway {
public:
  RpcEscrowGateway(std::string address, std::chrono::milliseconds timeout);
  bool verify(const std::string& escrow_id, const bank::EscrowExpectation& expected) override;
  void claim(const std::string& escrow_id, const std::string& secret) override;
  void settle(const std::string& escrow_id, bank::Outcome outcome,
              const std::string& secret) override;

private:
  bank::BankClient client_;
};

/// Per-cluster pricing, admission and simulated execution.
///
/// quote/submit/status/tick share one lock over the scheduler and quote
/// book. Bank calls run outside it: a submission holds its token as
/// pending while the escrow is checked, and completed jobs wait in a
/// settlement queue that is drained after the lock is released.
class Frontend {
public:
  Frontend(FrontendConfig config, std::shared_ptr<EscrowGateway> escrow);

  QuoteResult quote(const JobSpec& spec);

  /// Accepts the job into the FIFO queue or throws sg::Error with kind
  /// UnknownQuote, QuoteExpired, AuthFailed, EscrowInvalid or DuplicateJob.
  /// A rejection leaves the scheduler and quote book unchanged.
  JobStatus submit(const JobSpec& spec, const std::string& bid_token, const std::string& escrow_id);

  /// Advances the virtual clock and settles escrows of completed jobs.
  std::vector<sched::LifecycleEvent> tick(Seconds dt);

  /// Throws sg::Error("UnknownJob") for ids this cluster never accepted.
  JobStatus status(const std::string& job_id) const;

  ClusterDescriptor describe() const;
  void set_address(std::string address);

  Seconds clock() const;
  pricing::Load current_load() const;
  std::size_t pending_settlements() const;
  /// Retries settlements left over from failed bank calls.
  void drain_settlements();

  const FrontendConfig& config() const { return config_; }

private:
  struct Settlement {
    std::string job_id;
    std::string escrow_id;
  };

  std::string mint_token(const std::string& job_id);
  void purge_expired_quotes();

  FrontendConfig config_;
  std::shared_ptr<EscrowGateway> escrow_;

  mutable std::mutex mu_;
  sched::BatchScheduler scheduler_;
  std::map<std::string, QuoteRecord> quotes_;
  std::map<std::string, std::string> escrow_by_job_;
  std::vector<Settlement> pending_;
  std::uint64_t quote_seq_{0};
  std::string address_;

  std::mutex settle_mu_;
};

json quote_result_to_json(const QuoteResult& r);
QuoteResult quote_result_from_json(const json& j);

}  // namespace sg::frontend
