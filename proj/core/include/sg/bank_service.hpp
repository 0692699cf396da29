#pragma once

#include <chrono>
#include <fstream>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "sg/bank.hpp"
#include "sg/rpc.hpp"

namespace sg::bank {

struct BankConfig {
  std::string listen{"127.0.0.1:7702"};
  /// cluster_id -> shared secret used to report job outcomes.
  Bank::SecretMap cluster_secrets;
  /// Append-only JSON-lines operation log; empty disables it.
  std::string log_path;

  static BankConfig from_json(const json& j);
};

/// RPC surface of the bank: bank.create_account, bank.deposit, bank.balance,
/// bank.hold_escrow, bank.settle_escrow, bank.claim_escrow,
/// bank.verify_escrow, bank.audit, bank.get_escrow, bank.list_escrows,
/// bank.list_accounts and ping.
rpc::HandlerMap make_handlers(Bank& bank);

/// A bank bound to a listening socket. Creates one CLUSTER account per
/// configured cluster secret at startup.
class BankService {
public:
  explicit BankService(BankConfig config);
  ~BankService();

  Bank& bank() { return *bank_; }
  std::string address() const { return server_->address(); }
  void stop() { server_->stop(); }

private:
  BankConfig config_;
  std::unique_ptr<Bank> bank_;
  std::ofstream log_file_;
  std::unique_ptr<rpc::Server> server_;
};

/// Typed client for the bank's RPC surface.
class BankClient {
public:
  BankClient(std::string address, std::chrono::milliseconds timeout = std::chrono::seconds(5))
    : address_(std::move(address)), timeout_(timeout) {}

  std::string create_account(const std::string& owner, AccountKind kind,
                             const std::optional<std::string>& secret = std::nullopt) const;
  Money deposit(const std::string& account_id, Money amount) const;
  Money balance(const std::string& account_id) const;
  std::string hold_escrow(const std::string& payer, const std::string& payee, Money amount,
                          const std::string& job_id) const;
  EscrowRecord settle_escrow(const std::string& escrow_id, Outcome outcome,
                             const std::string& reporter_secret) const;
  EscrowRecord claim_escrow(const std::string& escrow_id, const std::string& reporter_secret) const;
  bool verify_escrow(const std::string& escrow_id, const EscrowExpectation& expected) const;
  AuditTotals audit() const;
  std::vector<EscrowRecord> list_escrows() const;

  const std::string& address() const { return address_; }

private:
  json call(std::string_view method, const json& params) const;

  std::string address_;
  std::chrono::milliseconds timeout_;
};

}  // namespace sg::bank
