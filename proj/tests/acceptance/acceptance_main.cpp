// Acceptance suite: one PASS/FAIL line per criterion, each with its own
// runtime budget. Exit status is non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracle/event_list_simulator.hpp"
#include "sg/bank.hpp"
#include "sg/bank_service.hpp"
#include "sg/broker.hpp"
#include "sg/broker_service.hpp"
#include "sg/canonical.hpp"
#include "sg/client.hpp"
#include "sg/clock.hpp"
#include "sg/frontend.hpp"
#include "sg/frontend_service.hpp"
#include "sg/harness.hpp"
#include "sg/rpc.hpp"
#include "sg/wire.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"

using namespace std::chrono_literals;
using nlohmann::json;
using sg::Money;

namespace {

// Budgets, in seconds.
constexpr double kLifecycleBudget = 5.0;
constexpr double kConservationBudget = 10.0;
constexpr double kArgminBudget = 1.0;
constexpr double kDistributionBudget = 30.0;
constexpr double kIsolationBudget = 5.0;
constexpr double kSchedulerBudget = 30.0;
constexpr double kWireBudget = 10.0;

constexpr int kBankSequences = 1000;
constexpr int kOpsPerSequence = 50;
constexpr int kSpreadScenarios = 50;
constexpr int kSchedulerSequences = 200;
constexpr int kWireMessages = 10000;
constexpr int kFuzzLines = 10000;
constexpr std::int64_t kBidTimeoutMs = 2000;   // 2 virtual seconds
constexpr double kIsolationSlack = 0.10;

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

using Check = std::function<Outcome()>;

std::string pad(int n) { return n < 10 ? " " + std::to_string(n) : std::to_string(n); }

std::vector<sg::harness::Scenario>& suite_scenarios() {
  static std::vector<sg::harness::Scenario> all;
  return all;
}

// 1 ------------------------------------------------------------------------

Outcome end_to_end_lifecycle() {
  Outcome out;
  sg::harness::Scenario s;
  s.clusters.push_back(fixtures::cluster_config("A", 8));
  s.users.push_back({"alice", 10000, "secret-alice"});
  s.workload.push_back({0, "alice", fixtures::job_fields(4, 100)});
  s.duration_s = 110;
  s.seed = 1;
  suite_scenarios().push_back(s);
  auto report = sg::harness::run_scenario(s);
  out.require(report.final_balances["user:alice"] == Money{9600}, "user balance != deposit - 400");
  out.require(report.final_balances["cluster:A"] == Money{400}, "cluster balance != 400");
  out.require(report.conservation_ok, "conservation violated");
  out.require(report.all_jobs_terminal, "job not terminal");

  // The same lifecycle against standalone services, inspecting the escrow
  // and job state directly.
  sg::bank::BankConfig bank_cfg;
  bank_cfg.listen = "127.0.0.1:0";
  bank_cfg.cluster_secrets = {{"A", "secret-A"}};
  sg::bank::BankService bank(bank_cfg);
  sg::broker::BrokerService broker({"127.0.0.1:0", kBidTimeoutMs, 30}, std::make_shared<sg::SystemTimeSource>());
  auto node_cfg = fixtures::cluster_config("A", 8);
  node_cfg["listen"] = "127.0.0.1:0";
  node_cfg["broker"] = broker.address();
  node_cfg["bank"] = bank.address();
  node_cfg["bank_secret"] = "secret-A";
  node_cfg["users"] = {{"alice", "pw"}};
  sg::frontend::FrontendService node(sg::frontend::FrontendConfig::from_json(node_cfg));

  sg::client::Client client(sg::client::ClientConfig::from_json(
      json{{"broker", broker.address()}, {"bank", bank.address()}, {"user", "alice"}, {"secret", "pw"}, {"rng_seed", 1}}));
  client.create_account();
  client.deposit(Money{10000});
  auto receipt = client.submit_job(fixtures::job_fields(4, 100));
  out.require(receipt.price == Money{400}, "quoted price != 400");
  sg::rpc::rpc_call(node.address(), "node.tick", json{{"dt", 100}}, 2s);
  auto status = client.job_status(receipt.job_id, receipt.address);
  auto escrow = bank.bank().escrow(receipt.escrow_id);
  out.require(status.state == sg::JobState::kCompleted, "job not COMPLETED");
  out.require(escrow && escrow->state == sg::bank::EscrowState::kReleased, "escrow not RELEASED");
  out.require(client.balance() == Money{9600}, "live user balance != 9600");
  out.require(bank.bank().balance("cluster:A") == Money{400}, "live cluster balance != 400");
  return out;
}

// 2 ------------------------------------------------------------------------

Outcome money_conservation() {
  Outcome out;
  std::mt19937_64 rng(20240601);
  long audits = 0;
  for (int seq = 0; seq < kBankSequences && out.ok; ++seq) {
    sg::bank::Bank bank{{{"c0", "s0"}, {"c1", "s1"}}};
    std::vector<std::string> users = {bank.create_account("u0", sg::bank::AccountKind::kUser, "p0"),
                                      bank.create_account("u1", sg::bank::AccountKind::kUser, "p1")};
    std::vector<std::string> clusters = {bank.create_account("c0", sg::bank::AccountKind::kCluster),
                                         bank.create_account("c1", sg::bank::AccountKind::kCluster)};
    std::vector<std::string> escrows;
    std::int64_t deposited = 0;
    for (int op = 0; op < kOpsPerSequence; ++op) {
      try {
        switch (rng() % 5) {
          case 0: {
            std::int64_t amt = static_cast<std::int64_t>(rng() % 2000) - 100;
            bank.deposit(rng() % 2 ? users[rng() % 2] : clusters[rng() % 2], Money{amt});
            deposited += amt;
            break;
          }
          case 1:
          case 2:
            escrows.push_back(bank.hold_escrow(users[rng() % 2], clusters[rng() % 2],
                                               Money{static_cast<std::int64_t>(rng() % 1500)},
                                               "j" + std::to_string(rng() % 20)));
            break;
          case 3:
            if (!escrows.empty()) {
              auto id = escrows[rng() % escrows.size()];
              const char* secrets[] = {"s0", "s1", "p0", "p1", "nope"};
              bank.settle_escrow(id, rng() % 2 ? sg::bank::Outcome::kCompleted : sg::bank::Outcome::kFailed,
                                 secrets[rng() % 5]);
            }
            break;
          default:
            if (!escrows.empty()) bank.claim_escrow(escrows[rng() % escrows.size()], rng() % 2 ? "s0" : "s1");
        }
      } catch (const sg::Error&) {
      }
      auto totals = bank.audit();
      ++audits;
      if (totals.total().amount != deposited) {
        out.require(false, "sequence " + std::to_string(seq) + " op " + std::to_string(op) + ": " +
                               std::to_string(totals.total().amount) + " vs deposits " + std::to_string(deposited));
        break;
      }
      for (const auto& a : bank.accounts()) out.require(a.balance.amount >= 0, "negative balance in " + a.account_id);
    }
  }
  if (out.ok) out.detail = std::to_string(audits) + " audits";
  return out;
}

// 3 ------------------------------------------------------------------------

Outcome argmin_selection() {
  Outcome out;
  const std::vector<std::string> ids = {"a", "aa", "b", "B", "c"};
  long checked = 0;
  for (std::size_t n = 1; n <= 5; ++n) {
    std::size_t combos = 1;
    for (std::size_t i = 0; i < n; ++i) combos *= 3;
    for (std::size_t code = 0; code < combos; ++code) {
      std::vector<sg::Bid> bids;
      std::size_t c = code;
      for (std::size_t i = 0; i < n; ++i, c /= 3) {
        bids.push_back({ids[i], Money{static_cast<std::int64_t>(100 + 50 * (c % 3))}, "t", 0});
      }
      auto by_id = [](const sg::Bid& x, const sg::Bid& y) { return x.cluster_id < y.cluster_id; };
      std::sort(bids.begin(), bids.end(), by_id);
      do {
        auto w = sg::broker::select_winner(bids);
        ++checked;
        if (!w) {
          out.require(false, "no winner");
          return out;
        }
        for (const auto& other : bids) {
          bool cheaper = other.price < bids[*w].price;
          bool tie_lost = other.price == bids[*w].price && other.cluster_id < bids[*w].cluster_id;
          out.require(!cheaper && !tie_lost, "wrong winner " + bids[*w].cluster_id);
        }
      } while (std::next_permutation(bids.begin(), bids.end(), by_id));
    }
  }
  if (out.ok) out.detail = std::to_string(checked) + " orderings";
  return out;
}

// 4 ------------------------------------------------------------------------

Outcome even_distribution() {
  Outcome out;
  auto base = fixtures::homogeneous_scenario(4, 8, 8, 4, 100);
  suite_scenarios().push_back(base);
  auto report = sg::harness::run_scenario(base);
  std::map<std::string, std::int64_t> expected = {{"A", 2}, {"B", 2}, {"C", 2}, {"D", 2}};
  out.require(report.jobs_per_cluster == expected, "4x8 split is " + report.to_json()["jobs_per_cluster"].dump());

  std::mt19937_64 rng(31337);
  for (int i = 0; i < kSpreadScenarios; ++i) {
    auto c = fixtures::random_spread_case(rng);
    auto s = fixtures::spread_scenario(c, rng());
    if (i < 5) suite_scenarios().push_back(s);
    auto r = sg::harness::run_scenario(s);
    std::int64_t lo = INT64_MAX, hi = 0, total = 0;
    for (const auto& [_, n] : r.jobs_per_cluster) {
      lo = std::min(lo, n);
      hi = std::max(hi, n);
      total += n;
    }
    out.require(total == c.jobs, "scenario " + std::to_string(i) + " placed " + std::to_string(total));
    out.require(hi - lo <= 1, "scenario " + std::to_string(i) + " spread " + r.to_json()["jobs_per_cluster"].dump());
  }
  return out;
}

// 5 ------------------------------------------------------------------------

Outcome broker_isolation() {
  Outcome out;
  fixtures::SilentListener hanging;
  sg::broker::BrokerService broker({"127.0.0.1:0", kBidTimeoutMs, 30}, std::make_shared<sg::ManualTimeSource>(0));
  auto cfg = fixtures::cluster_config("responsive", 8);
  cfg["listen"] = "127.0.0.1:0";
  sg::frontend::FrontendService node(sg::frontend::FrontendConfig::from_json(cfg), nullptr);
  broker.broker().register_cluster(node.node().describe(), 30);
  sg::ClusterDescriptor dead{"hanging", hanging.address(), 8, {}, Money{1}, "cluster:hanging"};
  broker.broker().register_cluster(dead, 30);

  sg::broker::BrokerClient client(broker.address(), 10s);
  auto start = std::chrono::steady_clock::now();
  auto sel = client.find_cluster(sg::validate_jobspec(fixtures::full_spec()));
  double elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  out.require(sel.cluster_id == "responsive", "selected " + sel.cluster_id);
  out.require(elapsed_ms <= kBidTimeoutMs * (1.0 + kIsolationSlack),
              "selection took " + std::to_string(elapsed_ms) + " ms");
  if (out.ok) out.detail = "selection latency " + std::to_string(static_cast<int>(elapsed_ms)) + " ms";
  return out;
}

// 6 ------------------------------------------------------------------------

Outcome scheduler_oracle() {
  Outcome out;
  std::mt19937_64 rng(161803);
  for (int i = 0; i < kSchedulerSequences && out.ok; ++i) {
    auto run = generators::random_fifo_run(rng);
    bool capacity_ok = true;
    auto got = generators::drive_scheduler(run, &capacity_ok);
    out.require(capacity_ok, "capacity exceeded in sequence " + std::to_string(i));
    for (const auto& tl : oracle::simulate_fifo(run.capacity, run.arrivals)) {
      auto it = got.find(tl.job_id);
      bool same = it != got.end() && it->second.first == tl.start && it->second.second == tl.finish;
      out.require(same, "sequence " + std::to_string(i) + " job " + tl.job_id + " diverges");
    }
  }
  return out;
}

// 7 ------------------------------------------------------------------------

Outcome wire_codec() {
  Outcome out;
  out.require(sg::wire::encode_message(sg::wire::RpcRequest{"1", "ping", json::object()}) ==
                  "{\"id\":\"1\",\"method\":\"ping\",\"params\":{}}\n",
              "ping golden bytes differ");
  out.require(sg::wire::encode_message(sg::wire::RpcResponse::success("1", true)) == "{\"id\":\"1\",\"result\":true}\n",
              "result golden bytes differ");
  std::mt19937_64 rng(4096);
  for (int i = 0; i < kWireMessages && out.ok; ++i) {
    auto msg = generators::random_message(rng);
    auto line = sg::wire::encode_message(msg);
    bool framed = !line.empty() && line.back() == '\n' && line.find('\n') == line.size() - 1;
    out.require(framed, "bad framing: " + line);
    if (!framed) break;
    out.require(sg::wire::decode_message(std::string_view(line).substr(0, line.size() - 1)) == msg,
                "round-trip mismatch: " + line);
  }
  int rejected = 0;
  for (int i = 0; i < kFuzzLines; ++i) {
    std::string line;
    int n = static_cast<int>(rng() % 96);
    for (int k = 0; k < n; ++k) line += static_cast<char>(rng() % 256);
    try {
      sg::wire::decode_message(line);
    } catch (const sg::wire::FramingError&) {
      ++rejected;
    } catch (const std::exception& e) {
      out.require(false, std::string("decode threw a non-framing error: ") + e.what());
    }
  }
  if (out.ok) out.detail = std::to_string(rejected) + " fuzz lines rejected cleanly";
  return out;
}

// 8 ------------------------------------------------------------------------

Outcome determinism() {
  Outcome out;
  auto scenarios = suite_scenarios();
  sg::harness::Scenario empty;
  empty.clusters = {fixtures::cluster_config("A", 8)};
  empty.duration_s = 10;
  scenarios.push_back(empty);
  std::mt19937_64 rng(4242);
  for (int i = 0; i < 20; ++i) scenarios.push_back(fixtures::random_market(rng));
#ifdef SG_SCENARIO_DIR
  for (const char* name : {"single_job.json", "even_4x8.json"}) {
    std::ifstream in(std::string(SG_SCENARIO_DIR) + "/" + name);
    std::stringstream buf;
    buf << in.rdbuf();
    scenarios.push_back(sg::harness::Scenario::from_json(json::parse(buf.str())));
  }
#endif
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    out.require(sg::harness::replay_check(scenarios[i]), "scenario " + std::to_string(i) + " did not replay");
  }
  if (out.ok) out.detail = std::to_string(scenarios.size()) + " scenarios replayed";
  return out;
}

// 9 ------------------------------------------------------------------------

Outcome feature_gating() {
  Outcome out;
  auto plain_cfg = fixtures::cluster_config("plain", 8);
  auto gated_cfg = fixtures::cluster_config("gated", 8, 1, {"deadline"});
  gated_cfg["feature_multipliers"] = {{"deadline", {5, 4}}};
  sg::frontend::Frontend plain(sg::frontend::FrontendConfig::from_json(plain_cfg), nullptr);
  sg::frontend::Frontend gated(sg::frontend::FrontendConfig::from_json(gated_cfg), nullptr);
  auto spec = sg::validate_jobspec(fixtures::full_spec(2, 100, {"deadline"}));

  auto refused = plain.quote(spec);
  auto* no_bid = std::get_if<sg::frontend::NoBid>(&refused);
  out.require(no_bid && no_bid->reason == "unsupported_feature", "cluster without capability did not refuse");
  auto priced = gated.quote(spec);
  auto* bid = std::get_if<sg::Bid>(&priced);
  out.require(bid && bid->price == Money{250}, "capable cluster did not bid 250");

  // And through a broker, over the wire.
  sg::broker::BrokerService broker({"127.0.0.1:0", kBidTimeoutMs, 30}, std::make_shared<sg::ManualTimeSource>(0));
  plain_cfg["listen"] = gated_cfg["listen"] = "127.0.0.1:0";
  plain_cfg["broker"] = gated_cfg["broker"] = broker.address();
  sg::frontend::FrontendService n1(sg::frontend::FrontendConfig::from_json(plain_cfg), nullptr);
  sg::frontend::FrontendService n2(sg::frontend::FrontendConfig::from_json(gated_cfg), nullptr);
  auto sel = broker.broker().find_cluster(spec);
  out.require(sel.cluster_id == "gated" && sel.price == Money{250}, "broker picked " + sel.cluster_id);
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    int number;
    const char* name;
    double budget_s;
    Check check;
  };
  const std::vector<Criterion> criteria = {
      {1, "end-to-end lifecycle", kLifecycleBudget, end_to_end_lifecycle},
      {2, "money conservation", kConservationBudget, money_conservation},
      {3, "argmin selection", kArgminBudget, argmin_selection},
      {4, "even distribution", kDistributionBudget, even_distribution},
      {5, "broker isolation", kIsolationBudget, broker_isolation},
      {6, "scheduler oracle equivalence", kSchedulerBudget, scheduler_oracle},
      {7, "wire round-trip and golden bytes", kWireBudget, wire_codec},
      {8, "determinism", 0.0, determinism},
      {9, "feature gating", 0.0, feature_gating},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    Outcome out;
    auto start = std::chrono::steady_clock::now();
    try {
      out = c.check();
    } catch (const std::exception& e) {
      out.ok = false;
      out.detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0 && secs >= c.budget_s && out.ok) {
      out.ok = false;
      out.detail = "over budget of " + std::to_string(c.budget_s) + " s";
    }
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.2fs", secs);
    std::cout << (out.ok ? "PASS" : "FAIL") << " [" << pad(c.number) << "] " << c.name << " (" << timing;
    if (c.budget_s > 0) std::cout << " of " << c.budget_s << "s";
    std::cout << ")";
    if (!out.detail.empty()) std::cout << ": " << out.detail;
    std::cout << std::endl;
    failures += out.ok ? 0 : 1;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
