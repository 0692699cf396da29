#include "sg/bank_service.hpp"

#include "sg/error.hpp"
#include "sg/json_fields.hpp"

namespace sg::bank {

namespace f = fields;

BankConfig BankConfig::from_json(const json& j) {
  f::require_object(j, "bank config");
  BankConfig c;
  if (auto listen = f::get_optional_string(j, "listen")) c.listen = *listen;
  parse_endpoint(c.listen);
  if (const json* secrets = f::find(j, "cluster_secrets")) {
    f::require_object(*secrets, "cluster_secrets");
    for (const auto& [id, secret] : secrets->items()) {
      c.cluster_secrets[id] = f::as_string(secret, "cluster_secrets");
    }
  }
  if (auto path = f::get_optional_string(j, "log_path")) c.log_path = *path;
  f::reject_unknown(j, {"listen", "cluster_secrets", "log_path"});
  return c;
}

rpc::HandlerMap make_handlers(Bank& bank) {
  rpc::HandlerMap h;
  h["ping"] = [](const json&) { return json(true); };
  h["bank.create_account"] = [&bank](const json& p) {
    auto id = bank.create_account(f::get_string(p, "owner"),
                                  parse_account_kind(f::get_string(p, "kind")),
                                  f::get_optional_string(p, "secret"));
    return json{{"account_id", id}};
  };
  h["bank.deposit"] = [&bank](const json& p) {
    Money bal = bank.deposit(f::get_string(p, "account_id"), Money{f::get_int(p, "amount")});
    return json{{"balance", bal.amount}};
  };
  h["bank.balance"] = [&bank](const json& p) {
    return json{{"balance", bank.balance(f::get_string(p, "account_id")).amount}};
  };
  h["bank.hold_escrow"] = [&bank](const json& p) {
    auto id = bank.hold_escrow(f::get_string(p, "payer"), f::get_string(p, "payee"),
                               Money{f::get_int(p, "amount")}, f::get_string(p, "job_id"));
    return json{{"escrow_id", id}};
  };
  h["bank.settle_escrow"] = [&bank](const json& p) {
    return json(bank.settle_escrow(f::get_string(p, "escrow_id"),
                                   parse_outcome(f::get_string(p, "outcome")),
                                   f::get_string(p, "reporter_secret")));
  };
  h["bank.claim_escrow"] = [&bank](const json& p) {
    return json(bank.claim_escrow(f::get_string(p, "escrow_id"), f::get_string(p, "reporter_secret")));
  };
  h["bank.verify_escrow"] = [&bank](const json& p) {
    const json& e = f::require(p, "expected");
    f::require_object(e, "expected");
    return json(bank.verify_escrow(
        f::get_string(p, "escrow_id"),
        EscrowExpectation{f::get_string(e, "payee"), f::get_string(e, "job_id"),
                          decode_money(f::require(e, "min_amount"), "min_amount")}));
  };
  h["bank.audit"] = [&bank](const json&) { return json(bank.audit()); };
  h["bank.get_escrow"] = [&bank](const json& p) {
    auto id = f::get_string(p, "escrow_id");
    auto e = bank.escrow(id);
    if (!e) throw Error("UnknownEscrow", id);
    return json(*e);
  };
  h["bank.list_escrows"] = [&bank](const json&) { return json(bank.escrows()); };
  h["bank.list_accounts"] = [&bank](const json&) { return json(bank.accounts()); };
  return h;
}

BankService::BankService(BankConfig config)
  : config_(std::move(config)), bank_(std::make_unique<Bank>(config_.cluster_secrets)) {
  if (!config_.log_path.empty()) {
    log_file_.open(config_.log_path, std::ios::app);
    if (!log_file_) throw Error("LogOpenFailed", config_.log_path);
    bank_->set_log_sink([this](const json& op) { log_file_ << op.dump() << '\n' << std::flush; });
  }
  for (const auto& [cluster_id, _] : config_.cluster_secrets) {
    bank_->create_account(cluster_id, AccountKind::kCluster);
  }
  server_ = rpc::serve(config_.listen, make_handlers(*bank_));
}

BankService::~BankService() {
  if (server_) server_->stop();
}

json BankClient::call(std::string_view method, const json& params) const {
  return rpc::rpc_call(address_, method, params, timeout_);
}

std::string BankClient::create_account(const std::string& owner, AccountKind kind,
                                       const std::optional<std::string>& secret) const {
  json p{{"owner", owner}, {"kind", to_string(kind)}};
  if (secret) p["secret"] = *secret;
  return call("bank.create_account", p).at("account_id").get<std::string>();
}

Money BankClient::deposit(const std::string& account_id, Money amount) const {
  return decode_money(
      call("bank.deposit", {{"account_id", account_id}, {"amount", amount.amount}}).at("balance"));
}

Money BankClient::balance(const std::string& account_id) const {
  return decode_money(call("bank.balance", {{"account_id", account_id}}).at("balance"));
}

std::string BankClient::hold_escrow(const std::string& payer, const std::string& payee,
                                    Money amount, const std::string& job_id) const {
  return call("bank.hold_escrow",
              {{"payer", payer}, {"payee", payee}, {"amount", amount.amount}, {"job_id", job_id}})
      .at("escrow_id")
      .get<std::string>();
}

EscrowRecord BankClient::settle_escrow(const std::string& escrow_id, Outcome outcome,
                                       const std::string& reporter_secret) const {
  return decode_escrow_record(call("bank.settle_escrow", {{"escrow_id", escrow_id},
                                                          {"outcome", to_string(outcome)},
                                                          {"reporter_secret", reporter_secret}}));
}

EscrowRecord BankClient::claim_escrow(const std::string& escrow_id,
                                      const std::string& reporter_secret) const {
  return decode_escrow_record(call(
      "bank.claim_escrow", {{"escrow_id", escrow_id}, {"reporter_secret", reporter_secret}}));
}

bool BankClient::verify_escrow(const std::string& escrow_id,
                               const EscrowExpectation& expected) const {
  json r = call("bank.verify_escrow",
                {{"escrow_id", escrow_id},
                 {"expected",
                  {{"payee", expected.payee},
                   {"job_id", expected.job_id},
                   {"min_amount", expected.min_amount.amount}}}});
  return r.is_boolean() && r.get<bool>();
}

AuditTotals BankClient::audit() const { return decode_audit(call("bank.audit", json::object())); }

std::vector<EscrowRecord> BankClient::list_escrows() const {
  std::vector<EscrowRecord> out;
  for (const auto& e : call("bank.list_escrows", json::object())) {
    out.push_back(decode_escrow_record(e));
  }
  return out;
}

}  // namespace sg::bank
