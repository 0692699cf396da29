#include "sg/harness.hpp"

#include <algorithm>
#include <memory>

#include "sg/bank_service.hpp"
#include "sg/broker_service.hpp"
#include "sg/canonical.hpp"
#include "sg/client.hpp"
#include "sg/error.hpp"
#include "sg/frontend_service.hpp"
#include "sg/json_fields.hpp"
#include "sg/rpc.hpp"

namespace sg::harness {

namespace f = fields;

namespace {

constexpr auto kRpcTimeout = std::chrono::milliseconds(10000);
constexpr Seconds kAuditEvery = 10;

std::string cluster_secret(const std::string& cluster_id) { return "bank-secret-" + cluster_id; }

}  // namespace

Scenario Scenario::from_json(const json& j) {
  f::require_object(j, "scenario");
  Scenario s;
  const json& clusters = f::require(j, "clusters");
  if (!clusters.is_array()) throw ValidationError("clusters", "expected an array");
  for (const auto& c : clusters) {
    f::require_object(c, "clusters");
    s.clusters.push_back(c);
  }
  const json& users = f::require(j, "users");
  if (!users.is_array()) throw ValidationError("users", "expected an array");
  for (const auto& u : users) {
    f::require_object(u, "users");
    ScenarioUser su;
    su.account = f::get_string(u, "account");
    su.initial_deposit = f::get_int(u, "initial_deposit");
    su.secret = f::get_optional_string(u, "secret").value_or("secret-" + su.account);
    s.users.push_back(std::move(su));
  }
  const json& workload = f::require(j, "workload");
  if (!workload.is_array()) throw ValidationError("workload", "expected an array");
  for (const auto& w : workload) {
    f::require_object(w, "workload");
    WorkloadItem item;
    item.submit_at = f::get_int(w, "submit_at");
    item.user = f::get_string(w, "user");
    item.spec = f::require(w, "spec");
    f::require_object(item.spec, "spec");
    s.workload.push_back(std::move(item));
  }
  s.duration_s = f::get_int(j, "duration_s");
  const json& seed = f::require(j, "seed");
  if (seed.is_number_unsigned()) {
    s.seed = seed.get<std::uint64_t>();
  } else {
    s.seed = static_cast<std::uint64_t>(f::as_int(seed, "seed"));
  }
  if (auto v = f::get_optional_int(j, "bid_timeout_ms")) s.bid_timeout_ms = *v;
  if (auto v = f::get_optional_int(j, "registration_ttl_s")) s.registration_ttl_s = *v;
  f::reject_unknown(j, {"clusters", "users", "workload", "duration_s", "seed", "bid_timeout_ms",
                        "registration_ttl_s"});
  s.validate();
  return s;
}

json Scenario::to_json() const {
  json users_json = json::array();
  for (const auto& u : users) {
    users_json.push_back({{"account", u.account}, {"initial_deposit", u.initial_deposit}, {"secret", u.secret}});
  }
  json workload_json = json::array();
  for (const auto& w : workload) {
    workload_json.push_back({{"submit_at", w.submit_at}, {"user", w.user}, {"spec", w.spec}});
  }
  return json{{"clusters", clusters},
              {"users", users_json},
              {"workload", workload_json},
              {"duration_s", duration_s},
              {"seed", seed},
              {"bid_timeout_ms", bid_timeout_ms},
              {"registration_ttl_s", registration_ttl_s}};
}

void Scenario::validate() const {
  if (duration_s < 0) throw ValidationError("duration_s", "must be >= 0");
  if (bid_timeout_ms < 1) throw ValidationError("bid_timeout_ms", "must be >= 1");
  if (registration_ttl_s < 5 || registration_ttl_s > 3600) {
    throw ValidationError("registration_ttl_s", "must be within [5, 3600]");
  }
  std::set<std::string> accounts;
  for (const auto& u : users) {
    if (u.account.empty()) throw ValidationError("users", "account must not be empty");
    if (u.initial_deposit < 0) throw ValidationError("users", "initial_deposit must be >= 0");
    if (!accounts.insert(u.account).second) throw ValidationError("users", "duplicate account " + u.account);
  }
  std::set<std::string> ids;
  for (const auto& c : clusters) {
    std::string id = f::get_string(c, "cluster_id");
    if (!ids.insert(id).second) throw ValidationError("clusters", "duplicate cluster_id " + id);
  }
  Seconds last = 0;
  for (const auto& w : workload) {
    if (w.submit_at < last) throw ValidationError("workload", "submit times must be ascending");
    if (w.submit_at >= duration_s) throw ValidationError("duration_s", "does not cover the last submission");
    if (!accounts.contains(w.user)) throw ValidationError("workload", "unknown user " + w.user);
    last = w.submit_at;
  }
}

json MarketReport::to_json() const {
  json prices = json::array();
  for (const auto& p : price_series) {
    prices.push_back({{"time", p.time}, {"cluster_id", p.cluster_id}, {"price", p.price.amount}});
  }
  json balances = json::object();
  for (const auto& [acct, m] : final_balances) balances[acct] = m.amount;
  return json{{"jobs_per_cluster", jobs_per_cluster},
              {"price_series", prices},
              {"final_balances", balances},
              {"conservation_ok", conservation_ok},
              {"all_jobs_terminal", all_jobs_terminal},
              {"errors", errors}};
}

MarketReport MarketReport::from_json(const json& j) {
  f::require_object(j, "report");
  MarketReport r;
  for (const auto& [id, n] : f::require(j, "jobs_per_cluster").items()) {
    r.jobs_per_cluster[id] = f::as_int(n, "jobs_per_cluster");
  }
  for (const auto& p : f::require(j, "price_series")) {
    r.price_series.push_back(PricePoint{f::get_int(p, "time"), f::get_string(p, "cluster_id"),
                                        decode_money(f::require(p, "price"), "price")});
  }
  for (const auto& [acct, m] : f::require(j, "final_balances").items()) {
    r.final_balances[acct] = decode_money(m, "final_balances");
  }
  r.conservation_ok = f::get_bool(j, "conservation_ok");
  r.all_jobs_terminal = f::get_bool(j, "all_jobs_terminal");
  for (const auto& e : f::require(j, "errors")) r.errors.push_back(e);
  return r;
}

MarketReport run_scenario(const Scenario& scenario) {
  scenario.validate();

  // Bank, with one secret per cluster and a funded account per user.
  bank::BankConfig bank_cfg;
  bank_cfg.listen = "127.0.0.1:0";
  for (const auto& c : scenario.clusters) {
    std::string id = f::get_string(c, "cluster_id");
    bank_cfg.cluster_secrets[id] = cluster_secret(id);
  }
  bank::BankService bank_svc(bank_cfg);
  bank::BankClient bank(bank_svc.address(), kRpcTimeout);

  Money deposited;
  for (const auto& u : scenario.users) {
    std::string id = bank.create_account(u.account, bank::AccountKind::kUser, u.secret);
    if (u.initial_deposit > 0) {
      bank.deposit(id, Money{u.initial_deposit});
      deposited = deposited + Money{u.initial_deposit};
    }
  }

  auto broker_clock = std::make_shared<ManualTimeSource>(0);
  broker::BrokerConfig broker_cfg;
  broker_cfg.listen = "127.0.0.1:0";
  broker_cfg.bid_timeout_ms = scenario.bid_timeout_ms;
  broker_cfg.default_ttl_s = scenario.registration_ttl_s;
  broker::BrokerService broker_svc(broker_cfg, broker_clock);

  json user_secrets = json::object();
  for (const auto& u : scenario.users) user_secrets[u.account] = u.secret;

  std::vector<std::unique_ptr<frontend::FrontendService>> nodes;
  std::vector<std::unique_ptr<rpc::RpcChannel>> tick_channels;
  MarketReport report;
  for (const auto& raw : scenario.clusters) {
    json cfg = raw;
    std::string id = f::get_string(cfg, "cluster_id");
    cfg["listen"] = "127.0.0.1:0";
    cfg["broker"] = broker_svc.address();
    cfg["bank"] = bank_svc.address();
    cfg["clock_mode"] = "virtual";
    cfg["users"] = user_secrets;
    cfg["bank_secret"] = cluster_secret(id);
    cfg["payee_account"] = bank::account_id_for(id, bank::AccountKind::kCluster);
    cfg["announce_ttl_s"] = scenario.registration_ttl_s;
    nodes.push_back(std::make_unique<frontend::FrontendService>(frontend::FrontendConfig::from_json(cfg)));
    tick_channels.push_back(std::make_unique<rpc::RpcChannel>(nodes.back()->address()));
    report.jobs_per_cluster[id] = 0;
  }

  std::map<std::string, client::Client> clients;
  for (const auto& u : scenario.users) {
    client::ClientConfig cc;
    cc.broker = broker_svc.address();
    cc.bank = bank_svc.address();
    cc.user = u.account;
    cc.secret = u.secret;
    cc.account_id = bank::account_id_for(u.account, bank::AccountKind::kUser);
    cc.rng_seed = scenario.seed ^ fnv1a64(u.account);
    cc.timeout_ms = kRpcTimeout.count();
    clients.emplace(u.account, client::Client(cc));
  }

  auto audit_ok = [&] { return bank.audit().total() == deposited; };

  std::vector<client::SubmissionReceipt> receipts;
  std::size_t next = 0;
  for (Seconds t = 0; t < scenario.duration_s; ++t) {
    for (; next < scenario.workload.size() && scenario.workload[next].submit_at == t; ++next) {
      const WorkloadItem& item = scenario.workload[next];
      try {
        auto receipt = clients.at(item.user).submit_job(item.spec);
        report.jobs_per_cluster[receipt.cluster_id] += 1;
        report.price_series.push_back(PricePoint{t, receipt.cluster_id, receipt.price});
        receipts.push_back(std::move(receipt));
      } catch (const Error& e) {
        report.errors.push_back({{"time", t}, {"user", item.user}, {"error", e.kind()}});
      } catch (const rpc::RpcError& e) {
        report.errors.push_back(
            {{"time", t}, {"user", item.user}, {"error", std::string(wire::to_string(e.code()))}});
      }
    }

    broker_clock->set(t + 1);
    for (auto& ch : tick_channels) ch->call("node.tick", {{"dt", 1}}, kRpcTimeout);

    if ((t + 1) % kAuditEvery == 0 && !audit_ok()) report.conservation_ok = false;
  }
  if (!audit_ok()) report.conservation_ok = false;

  for (const auto& r : receipts) {
    JobStatus st = decode_job_status(rpc::rpc_call(r.address, "node.status", {{"job_id", r.job_id}}, kRpcTimeout));
    if (!is_terminal(st.state)) report.all_jobs_terminal = false;
  }
  for (const auto& e : bank.list_escrows()) {
    if (e.state == bank::EscrowState::kHeld) report.all_jobs_terminal = false;
  }

  for (const auto& acct : rpc::rpc_call(bank_svc.address(), "bank.list_accounts", json::object(), kRpcTimeout)) {
    report.final_balances[f::get_string(acct, "account_id")] =
        decode_money(f::require(acct, "balance"), "balance");
  }

  for (auto& n : nodes) n->stop();
  broker_svc.stop();
  bank_svc.stop();
  return report;
}

bool replay_check(const Scenario& scenario) {
  std::string first = canonical_dump(run_scenario(scenario).to_json());
  std::string second = canonical_dump(run_scenario(scenario).to_json());
  return first == second;
}

}  // namespace sg::harness
