#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sg/domain.hpp"

namespace sg::bank {

using nlohmann::json;

enum class AccountKind { kUser, kCluster };
enum class EscrowState { kHeld, kReleased, kRefunded };
enum class Outcome { kCompleted, kFailed };

std::string_view to_string(AccountKind k);
std::string_view to_string(EscrowState s);
std::string_view to_string(Outcome o);
AccountKind parse_account_kind(std::string_view s);
EscrowState parse_escrow_state(std::string_view s);
Outcome parse_outcome(std::string_view s);

struct Account {
  std::string account_id;
  std::string owner;
  AccountKind kind{AccountKind::kUser};
  Money balance;

  friend bool operator==(const Account&, const Account&) = default;
};

struct EscrowRecord {
  std::string escrow_id;
  std::string payer;
  std::string payee;
  Money amount;
  std::string job_id;
  EscrowState state{EscrowState::kHeld};
  /// Set once the payee front-end has accepted the job; the payer can no
  /// longer withdraw a claimed escrow.
  bool claimed{false};

  friend bool operator==(const EscrowRecord&, const EscrowRecord&) = default;
};

struct EscrowExpectation {
  std::string payee;
  std::string job_id;
  Money min_amount;
};

struct AuditTotals {
  Money total_balances;
  Money total_held;

  Money total() const { return total_balances + total_held; }
  friend bool operator==(const AuditTotals&, const AuditTotals&) = default;
};

void to_json(json& j, const Account& a);
void to_json(json& j, const EscrowRecord& e);
void to_json(json& j, const AuditTotals& t);
EscrowRecord decode_escrow_record(const json& j);
AuditTotals decode_audit(const json& j);

/// Deterministic account id for an (owner, kind) pair.
std::string account_id_for(std::string_view owner, AccountKind kind);

/// Accounts, balances and escrow settlement.
///
/// All mutations are serialized behind one writer lock; reads share it.
/// Every successful mutation is appended to an operation log that replay()
/// can re-apply to reproduce the exact same state.
class Bank {
public:
  using SecretMap = std::map<std::string, std::string>;
  using LogSink = std::function<void(const json&)>;

  explicit Bank(SecretMap cluster_secrets = {});

  std::string create_account(const std::string& owner, AccountKind kind,
                             const std::optional<std::string>& secret = std::nullopt);
  Money deposit(const std::string& account_id, Money amount);
  Money balance(const std::string& account_id) const;

  std::string hold_escrow(const std::string& payer, const std::string& payee, Money amount,
                          const std::string& job_id);

  /// COMPLETED releases to the payee; FAILED refunds the payer. The reporter
  /// must present the payee cluster's secret, or the payer's own secret for a
  /// FAILED outcome on an escrow no front-end has claimed yet.
  EscrowRecord settle_escrow(const std::string& escrow_id, Outcome outcome,
                             const std::string& reporter_secret);

  /// Marks a HELD escrow as accepted by the payee front-end.
  EscrowRecord claim_escrow(const std::string& escrow_id, const std::string& reporter_secret);

  bool verify_escrow(const std::string& escrow_id, const EscrowExpectation& expected) const;

  AuditTotals audit() const;
  Money total_deposits() const;

  std::optional<EscrowRecord> escrow(const std::string& escrow_id) const;
  std::vector<EscrowRecord> escrows() const;
  std::vector<Account> accounts() const;

  std::vector<json> operation_log() const;
  void set_log_sink(LogSink sink);

  /// Rebuilds a bank by re-applying a log produced by operation_log().
  static std::unique_ptr<Bank> replay(const std::vector<json>& log,
                                      SecretMap cluster_secrets = {});

private:
  struct AccountEntry {
    Account account;
    std::optional<std::string> secret;
  };

  enum class Reporter { kPayee, kPayer };

  AccountEntry& require_account(const std::string& id);
  const AccountEntry& require_account(const std::string& id) const;
  EscrowRecord& require_escrow(const std::string& id);
  Reporter authorize(const EscrowRecord& e, Outcome outcome, const std::string& secret) const;
  bool is_payee_secret(const EscrowRecord& e, const std::string& secret) const;

  std::string create_account_locked(const std::string& owner, AccountKind kind,
                                    const std::optional<std::string>& secret);
  Money deposit_locked(const std::string& account_id, Money amount);
  std::string hold_locked(const std::string& payer, const std::string& payee, Money amount,
                          const std::string& job_id);
  EscrowRecord settle_locked(EscrowRecord& e, Outcome outcome);
  void record(json op);

  mutable std::shared_mutex mu_;
  SecretMap cluster_secrets_;
  std::map<std::string, AccountEntry> accounts_;
  std::map<std::string, EscrowRecord> escrows_;
  std::map<std::string, std::string> held_by_job_;
  std::uint64_t next_escrow_{1};
  Money deposits_;
  std::vector<json> log_;
  LogSink sink_;
};

}  // namespace sg::bank
