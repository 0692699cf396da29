#include "sg/client.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "sg/bank.hpp"
#include "sg/broker_service.hpp"
#include "sg/json_fields.hpp"
#include "sg/rpc.hpp"

namespace sg::client {

namespace f = fields;

ClientConfig ClientConfig::from_json(const json& j) {
  f::require_object(j, "client config");
  ClientConfig c;
  c.broker = f::get_string(j, "broker");
  parse_endpoint(c.broker);
  c.bank = f::get_string(j, "bank");
  parse_endpoint(c.bank);
  c.user = f::get_string(j, "user");
  if (c.user.empty()) throw ValidationError("user", "must not be empty");
  c.secret = f::get_string(j, "secret");
  if (c.secret.empty()) throw ValidationError("secret", "must not be empty");
  c.account_id = f::get_optional_string(j, "account_id")
                     .value_or(bank::account_id_for(c.user, bank::AccountKind::kUser));
  if (auto seed = f::get_optional_int(j, "rng_seed")) c.rng_seed = static_cast<std::uint64_t>(*seed);
  if (auto t = f::get_optional_int(j, "timeout_ms")) {
    if (*t < 1) throw ValidationError("timeout_ms", "must be >= 1");
    c.timeout_ms = *t;
  }
  f::reject_unknown(j, {"broker", "bank", "user", "secret", "account_id", "rng_seed", "timeout_ms"});
  return c;
}

JobSpec parse_spec(const json& file_fields, const SpecOverrides& overrides,
                   const SpecDefaults& defaults) {
  json merged = file_fields.is_null() ? json::object() : file_fields;
  f::require_object(merged, "spec");

  auto fill = [&](const char* key, const std::string& value) {
    if (!merged.contains(key) && !value.empty()) merged[key] = value;
  };
  fill("job_id", defaults.job_id);
  fill("user", defaults.user);
  fill("secret", defaults.secret);

  if (overrides.nodes) merged["nodes"] = *overrides.nodes;
  if (overrides.walltime_s) merged["walltime_s"] = *overrides.walltime_s;
  if (overrides.features) merged["required_features"] = *overrides.features;
  if (overrides.max_price) merged["max_price"] = *overrides.max_price;
  if (overrides.qos_class) merged["qos_class"] = *overrides.qos_class;
  if (overrides.command) merged["command"] = *overrides.command;
  if (overrides.workdir) merged["workdir"] = *overrides.workdir;

  return validate_jobspec(merged);
}

json load_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("SpecUnreadable", path);
  std::stringstream buf;
  buf << in.rdbuf();
  json j = json::parse(buf.str(), nullptr, false);
  if (j.is_discarded()) throw ValidationError("spec", path + " is not valid JSON");
  f::require_object(j, "spec");
  return j;
}

void to_json(json& j, const SubmissionReceipt& r) {
  j = json{{"job_id", r.job_id},   {"cluster_id", r.cluster_id}, {"address", r.address},
           {"price", r.price.amount}, {"escrow_id", r.escrow_id}};
}

int exit_code_for(const std::exception& e) {
  std::string kind;
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    kind = err->kind();
  } else if (const auto* rpc_err = dynamic_cast<const rpc::RpcError*>(&e)) {
    if (rpc_err->code() == rpc::RpcErrorCode::kApplicationError) kind = rpc_err->kind();
  }
  if (kind == "NoEligibleCluster") return exit_code::kNoEligibleCluster;
  if (kind == "InsufficientFunds") return exit_code::kInsufficientFunds;
  if (kind == "UnknownJob" || kind == "UnknownAccount") return exit_code::kUnknown;
  if (kind == "SubmissionRejected") return exit_code::kRejected;
  return exit_code::kOther;
}

Client::Client(ClientConfig config)
  : config_(std::move(config)), rng_(config_.rng_seed.value_or(std::random_device{}())) {}

std::string Client::mint_job_id() {
  char buf[33];
  std::snprintf(buf, sizeof(buf), "%016llx%016llx", static_cast<unsigned long long>(rng_()),
                static_cast<unsigned long long>(rng_()));
  return buf;
}

json Client::call(const std::string& address, std::string_view method, const json& params) const {
  try {
    return rpc::rpc_call(address, method, params, std::chrono::milliseconds(config_.timeout_ms));
  } catch (const rpc::RpcError& e) {
    if (e.code() == rpc::RpcErrorCode::kApplicationError) {
      const std::string& msg = e.message();
      auto pos = msg.find(": ");
      throw Error(e.kind(), pos == std::string::npos ? "" : msg.substr(pos + 2));
    }
    throw;
  }
}

SubmissionReceipt Client::submit_job(const json& spec_fields, const SpecOverrides& overrides) {
  std::string job_id = mint_job_id();
  JobSpec spec = parse_spec(spec_fields, overrides, {job_id, config_.user, config_.secret});

  broker::Selection sel =
      broker::BrokerClient(config_.broker, std::chrono::milliseconds(config_.timeout_ms))
          .find_cluster(spec);

  std::string escrow_id = call(config_.bank, "bank.hold_escrow",
                               {{"payer", config_.account_id},
                                {"payee", sel.payee_account},
                                {"amount", sel.price.amount},
                                {"job_id", spec.job_id}})
                              .at("escrow_id")
                              .get<std::string>();

  try {
    call(sel.address, "node.submit",
         {{"spec", spec}, {"bid_token", sel.bid_token}, {"escrow_id", escrow_id}});
  } catch (const std::exception& e) {
    std::string cause = "SubmitFailed";
    if (const auto* err = dynamic_cast<const Error*>(&e)) cause = err->kind();
    std::string detail = e.what();
    try {
      call(config_.bank, "bank.settle_escrow",
           {{"escrow_id", escrow_id}, {"outcome", "FAILED"}, {"reporter_secret", config_.secret}});
      detail += " (escrow " + escrow_id + " refunded)";
    } catch (const std::exception& refund) {
      detail += " (refund of " + escrow_id + " failed: " + refund.what() + ")";
    }
    throw SubmissionRejected(cause, detail);
  }

  return SubmissionReceipt{spec.job_id, sel.cluster_id, sel.address, sel.price, escrow_id};
}

JobStatus Client::job_status(const std::string& job_id, const std::string& node_address) const {
  return decode_job_status(call(node_address, "node.status", {{"job_id", job_id}}));
}

Money Client::balance() const {
  return decode_money(call(config_.bank, "bank.balance", {{"account_id", config_.account_id}}).at("balance"));
}

Money Client::deposit(Money amount) const {
  return decode_money(call(config_.bank, "bank.deposit",
                           {{"account_id", config_.account_id}, {"amount", amount.amount}})
                          .at("balance"));
}

std::string Client::create_account() const {
  return call(config_.bank, "bank.create_account",
              {{"owner", config_.user}, {"kind", "USER"}, {"secret", config_.secret}})
      .at("account_id")
      .get<std::string>();
}

}  // namespace sg::client
