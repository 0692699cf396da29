#include "sg/bank.hpp"

#include <cstdio>
#include <limits>
#include <mutex>

#include "sg/error.hpp"
#include "sg/json_fields.hpp"

namespace sg::bank {

namespace f = fields;

std::string_view to_string(AccountKind k) { return k == AccountKind::kUser ? "USER" : "CLUSTER"; }

std::string_view to_string(EscrowState s) {
  switch (s) {
    case EscrowState::kHeld: return "HELD";
    case EscrowState::kReleased: return "RELEASED";
    case EscrowState::kRefunded: return "REFUNDED";
  }
  return "?";
}

std::string_view to_string(Outcome o) { return o == Outcome::kCompleted ? "COMPLETED" : "FAILED"; }

AccountKind parse_account_kind(std::string_view s) {
  if (s == "USER") return AccountKind::kUser;
  if (s == "CLUSTER") return AccountKind::kCluster;
  throw ValidationError("kind", "must be USER or CLUSTER");
}

EscrowState parse_escrow_state(std::string_view s) {
  if (s == "HELD") return EscrowState::kHeld;
  if (s == "RELEASED") return EscrowState::kReleased;
  if (s == "REFUNDED") return EscrowState::kRefunded;
  throw ValidationError("state", "unknown escrow state");
}

Outcome parse_outcome(std::string_view s) {
  if (s == "COMPLETED") return Outcome::kCompleted;
  if (s == "FAILED") return Outcome::kFailed;
  throw ValidationError("outcome", "must be COMPLETED or FAILED");
}

void to_json(json& j, const Account& a) {
  j = json{{"account_id", a.account_id},
           {"owner", a.owner},
           {"kind", to_string(a.kind)},
           {"balance", a.balance.amount}};
}

void to_json(json& j, const EscrowRecord& e) {
  j = json{{"escrow_id", e.escrow_id}, {"payer", e.payer},
           {"payee", e.payee},         {"amount", e.amount.amount},
           {"job_id", e.job_id},       {"state", to_string(e.state)},
           {"claimed", e.claimed}};
}

void to_json(json& j, const AuditTotals& t) {
  j = json{{"total_balances", t.total_balances.amount}, {"total_held", t.total_held.amount}};
}

EscrowRecord decode_escrow_record(const json& j) {
  f::require_object(j, "escrow");
  EscrowRecord e;
  e.escrow_id = f::get_string(j, "escrow_id");
  e.payer = f::get_string(j, "payer");
  e.payee = f::get_string(j, "payee");
  e.amount = decode_money(f::require(j, "amount"), "amount");
  e.job_id = f::get_string(j, "job_id");
  e.state = parse_escrow_state(f::get_string(j, "state"));
  e.claimed = f::get_bool(j, "claimed");
  return e;
}

AuditTotals decode_audit(const json& j) {
  f::require_object(j, "audit");
  return AuditTotals{decode_money(f::require(j, "total_balances"), "total_balances"),
                     decode_money(f::require(j, "total_held"), "total_held")};
}

std::string account_id_for(std::string_view owner, AccountKind kind) {
  return std::string(kind == AccountKind::kUser ? "user:" : "cluster:") + std::string(owner);
}

namespace {

void require_positive(Money amount) {
  if (amount.amount <= 0) {
    throw Error("NonPositiveAmount", "amount must be > 0, got " + std::to_string(amount.amount));
  }
}

Money checked_add(Money a, Money b) {
  if (a.amount > std::numeric_limits<std::int64_t>::max() - b.amount) {
    throw Error("AmountTooLarge", "balance would overflow");
  }
  return a + b;
}

}  // namespace

Bank::Bank(SecretMap cluster_secrets) : cluster_secrets_(std::move(cluster_secrets)) {}

Bank::AccountEntry& Bank::require_account(const std::string& id) {
  auto it = accounts_.find(id);
  if (it == accounts_.end()) throw Error("UnknownAccount", id);
  return it->second;
}

const Bank::AccountEntry& Bank::require_account(const std::string& id) const {
  auto it = accounts_.find(id);
  if (it == accounts_.end()) throw Error("UnknownAccount", id);
  return it->second;
}

EscrowRecord& Bank::require_escrow(const std::string& id) {
  auto it = escrows_.find(id);
  if (it == escrows_.end()) throw Error("UnknownEscrow", id);
  return it->second;
}

void Bank::record(json op) {
  if (sink_) sink_(op);
  log_.push_back(std::move(op));
}

std::string Bank::create_account_locked(const std::string& owner, AccountKind kind,
                                        const std::optional<std::string>& secret) {
  if (owner.empty()) throw ValidationError("owner", "must not be empty");
  std::string id = account_id_for(owner, kind);
  if (accounts_.contains(id)) throw Error("DuplicateAccount", id);
  accounts_.emplace(id, AccountEntry{Account{id, owner, kind, Money{0}},
                                     kind == AccountKind::kUser ? secret : std::nullopt});
  return id;
}

std::string Bank::create_account(const std::string& owner, AccountKind kind,
                                 const std::optional<std::string>& secret) {
  std::unique_lock lock(mu_);
  std::string id = create_account_locked(owner, kind, secret);
  json op{{"op", "create_account"}, {"owner", owner}, {"kind", to_string(kind)}};
  if (secret && kind == AccountKind::kUser) op["secret"] = *secret;
  record(std::move(op));
  return id;
}

Money Bank::deposit_locked(const std::string& account_id, Money amount) {
  require_positive(amount);
  AccountEntry& entry = require_account(account_id);
  Money next = checked_add(entry.account.balance, amount);
  Money total = checked_add(deposits_, amount);
  entry.account.balance = next;
  deposits_ = total;
  return next;
}

Money Bank::deposit(const std::string& account_id, Money amount) {
  std::unique_lock lock(mu_);
  Money balance = deposit_locked(account_id, amount);
  record(json{{"op", "deposit"}, {"account_id", account_id}, {"amount", amount.amount}});
  return balance;
}

Money Bank::balance(const std::string& account_id) const {
  std::shared_lock lock(mu_);
  return require_account(account_id).account.balance;
}

std::string Bank::hold_locked(const std::string& payer, const std::string& payee, Money amount,
                              const std::string& job_id) {
  require_positive(amount);
  AccountEntry& from = require_account(payer);
  const AccountEntry& to = require_account(payee);
  if (from.account.kind != AccountKind::kUser) throw Error("WrongAccountKind", "payer must be a USER account");
  if (to.account.kind != AccountKind::kCluster) throw Error("WrongAccountKind", "payee must be a CLUSTER account");
  if (held_by_job_.contains(job_id)) throw Error("DuplicateEscrow", "job " + job_id);
  if (from.account.balance < amount) {
    throw Error("InsufficientFunds", payer + " has " + std::to_string(from.account.balance.amount) +
                                         ", needs " + std::to_string(amount.amount));
  }

  char buf[32];
  std::snprintf(buf, sizeof(buf), "esc-%06llu", static_cast<unsigned long long>(next_escrow_++));
  std::string id = buf;
  from.account.balance = from.account.balance - amount;
  escrows_.emplace(id, EscrowRecord{id, payer, payee, amount, job_id, EscrowState::kHeld, false});
  held_by_job_.emplace(job_id, id);
  return id;
}

std::string Bank::hold_escrow(const std::string& payer, const std::string& payee, Money amount,
                              const std::string& job_id) {
  std::unique_lock lock(mu_);
  std::string id = hold_locked(payer, payee, amount, job_id);
  record(json{{"op", "hold_escrow"},
              {"payer", payer},
              {"payee", payee},
              {"amount", amount.amount},
              {"job_id", job_id}});
  return id;
}

bool Bank::is_payee_secret(const EscrowRecord& e, const std::string& secret) const {
  const AccountEntry& payee = require_account(e.payee);
  auto it = cluster_secrets_.find(payee.account.owner);
  return it != cluster_secrets_.end() && !secret.empty() && it->second == secret;
}

Bank::Reporter Bank::authorize(const EscrowRecord& e, Outcome outcome,
                               const std::string& secret) const {
  if (is_payee_secret(e, secret)) return Reporter::kPayee;
  const AccountEntry& payer = require_account(e.payer);
  if (outcome == Outcome::kFailed && payer.secret && !secret.empty() && *payer.secret == secret) {
    if (e.claimed) throw Error("BadReporter", "escrow already claimed by the payee");
    return Reporter::kPayer;
  }
  throw Error("BadReporter", "reporter is not authorized for " + e.escrow_id);
}

EscrowRecord Bank::settle_locked(EscrowRecord& e, Outcome outcome) {
  const std::string& target = outcome == Outcome::kCompleted ? e.payee : e.payer;
  AccountEntry& acct = require_account(target);
  acct.account.balance = checked_add(acct.account.balance, e.amount);
  e.state = outcome == Outcome::kCompleted ? EscrowState::kReleased : EscrowState::kRefunded;
  held_by_job_.erase(e.job_id);
  return e;
}

EscrowRecord Bank::settle_escrow(const std::string& escrow_id, Outcome outcome,
                                 const std::string& reporter_secret) {
  std::unique_lock lock(mu_);
  EscrowRecord& e = require_escrow(escrow_id);
  if (e.state != EscrowState::kHeld) {
    throw Error("AlreadySettled", escrow_id + " is " + std::string(to_string(e.state)));
  }
  Reporter who = authorize(e, outcome, reporter_secret);
  EscrowRecord out = settle_locked(e, outcome);
  record(json{{"op", "settle_escrow"},
              {"escrow_id", escrow_id},
              {"outcome", to_string(outcome)},
              {"by", who == Reporter::kPayee ? "payee" : "payer"}});
  return out;
}

EscrowRecord Bank::claim_escrow(const std::string& escrow_id, const std::string& reporter_secret) {
  std::unique_lock lock(mu_);
  EscrowRecord& e = require_escrow(escrow_id);
  if (e.state != EscrowState::kHeld) {
    throw Error("AlreadySettled", escrow_id + " is " + std::string(to_string(e.state)));
  }
  if (!is_payee_secret(e, reporter_secret)) {
    throw Error("BadReporter", "only the payee may claim " + escrow_id);
  }
  if (!e.claimed) {
    e.claimed = true;
    record(json{{"op", "claim_escrow"}, {"escrow_id", escrow_id}});
  }
  return e;
}

bool Bank::verify_escrow(const std::string& escrow_id, const EscrowExpectation& expected) const {
  std::shared_lock lock(mu_);
  auto it = escrows_.find(escrow_id);
  if (it == escrows_.end()) return false;
  const EscrowRecord& e = it->second;
  return e.state == EscrowState::kHeld && e.payee == expected.payee &&
         e.job_id == expected.job_id && e.amount >= expected.min_amount;
}

AuditTotals Bank::audit() const {
  std::shared_lock lock(mu_);
  AuditTotals t;
  for (const auto& [_, entry] : accounts_) t.total_balances = t.total_balances + entry.account.balance;
  for (const auto& [_, e] : escrows_) {
    if (e.state == EscrowState::kHeld) t.total_held = t.total_held + e.amount;
  }
  return t;
}

Money Bank::total_deposits() const {
  std::shared_lock lock(mu_);
  return deposits_;
}

std::optional<EscrowRecord> Bank::escrow(const std::string& escrow_id) const {
  std::shared_lock lock(mu_);
  auto it = escrows_.find(escrow_id);
  if (it == escrows_.end()) return std::nullopt;
  return it->second;
}

std::vector<EscrowRecord> Bank::escrows() const {
  std::shared_lock lock(mu_);
  std::vector<EscrowRecord> out;
  out.reserve(escrows_.size());
  for (const auto& [_, e] : escrows_) out.push_back(e);
  return out;
}

std::vector<Account> Bank::accounts() const {
  std::shared_lock lock(mu_);
  std::vector<Account> out;
  out.reserve(accounts_.size());
  for (const auto& [_, entry] : accounts_) out.push_back(entry.account);
  return out;
}

std::vector<json> Bank::operation_log() const {
  std::shared_lock lock(mu_);
  return log_;
}

void Bank::set_log_sink(LogSink sink) {
  std::unique_lock lock(mu_);
  sink_ = std::move(sink);
}

std::unique_ptr<Bank> Bank::replay(const std::vector<json>& log, SecretMap cluster_secrets) {
  auto bank = std::make_unique<Bank>(std::move(cluster_secrets));
  std::unique_lock lock(bank->mu_);
  for (const json& op : log) {
    const std::string kind = f::get_string(op, "op");
    if (kind == "create_account") {
      bank->create_account_locked(f::get_string(op, "owner"),
                                  parse_account_kind(f::get_string(op, "kind")),
                                  f::get_optional_string(op, "secret"));
    } else if (kind == "deposit") {
      bank->deposit_locked(f::get_string(op, "account_id"), Money{f::get_int(op, "amount")});
    } else if (kind == "hold_escrow") {
      bank->hold_locked(f::get_string(op, "payer"), f::get_string(op, "payee"),
                        Money{f::get_int(op, "amount")}, f::get_string(op, "job_id"));
    } else if (kind == "settle_escrow") {
      EscrowRecord& e = bank->require_escrow(f::get_string(op, "escrow_id"));
      if (e.state != EscrowState::kHeld) throw Error("AlreadySettled", e.escrow_id);
      bank->settle_locked(e, parse_outcome(f::get_string(op, "outcome")));
    } else if (kind == "claim_escrow") {
      bank->require_escrow(f::get_string(op, "escrow_id")).claimed = true;
    } else {
      throw ValidationError("op", "unknown operation \"" + kind + "\"");
    }
    bank->log_.push_back(op);
  }
  return bank;
}

}  // namespace sg::bank
