#include <iostream>

#include <CLI11.hpp>

#include "cli_support.hpp"
#include "sg/canonical.hpp"
#include "sg/client.hpp"

namespace ec = sg::client::exit_code;

namespace {

sg::client::Client make_client(const std::string& config_path) {
  return sg::client::Client(sg::client::ClientConfig::from_json(sg::cli::read_json_file(config_path)));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Submit jobs to the cheapest eligible cluster"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "client.json")->required();

  auto* submit = app.add_subcommand("submit", "Select a cluster, escrow the price and submit");
  std::string spec_path;
  sg::client::SpecOverrides overrides;
  std::int64_t nodes = 0, walltime = 0, max_price = 0;
  std::vector<std::string> features;
  std::string command, workdir, qos;
  submit->add_option("--spec", spec_path, "Job specification JSON file");
  auto* nodes_opt = submit->add_option("--nodes", nodes, "Node count");
  auto* wall_opt = submit->add_option("--walltime", walltime, "Walltime in seconds");
  auto* feat_opt = submit->add_option("--feature", features, "Required feature (repeatable)");
  auto* price_opt = submit->add_option("--max-price", max_price, "Price cap in millicredits");
  auto* cmd_opt = submit->add_option("--command", command, "Command to run");
  auto* dir_opt = submit->add_option("--workdir", workdir, "Pre-staged working directory");
  auto* qos_opt = submit->add_option("--qos", qos, "standard or priority");

  auto* status = app.add_subcommand("status", "Show a submitted job's state");
  std::string job_id, node;
  status->add_option("--job", job_id)->required();
  status->add_option("--node", node, "host:port of the cluster front-end")->required();

  auto* balance = app.add_subcommand("balance", "Show the account balance");
  auto* deposit = app.add_subcommand("deposit", "Add funds (test faucet)");
  std::int64_t amount = 0;
  deposit->add_option("--amount", amount, "Millicredits")->required();
  auto* account = app.add_subcommand("account", "Create the configured user's account");

  CLI11_PARSE(app, argc, argv);

  try {
    auto client = make_client(config_path);
    if (*submit) {
      if (*nodes_opt) overrides.nodes = nodes;
      if (*wall_opt) overrides.walltime_s = walltime;
      if (*feat_opt) overrides.features = features;
      if (*price_opt) overrides.max_price = max_price;
      if (*cmd_opt) overrides.command = command;
      if (*dir_opt) overrides.workdir = workdir;
      if (*qos_opt) overrides.qos_class = qos;
      nlohmann::json fields = spec_path.empty() ? nlohmann::json::object()
                                                : sg::client::load_spec_file(spec_path);
      auto receipt = client.submit_job(fields, overrides);
      std::cout << sg::canonical_encode(receipt) << std::endl;
    } else if (*status) {
      std::cout << sg::canonical_encode(client.job_status(job_id, node)) << std::endl;
    } else if (*balance) {
      std::cout << sg::canonical_encode(client.balance()) << std::endl;
    } else if (*deposit) {
      std::cout << sg::canonical_encode(client.deposit(sg::Money{amount})) << std::endl;
    } else if (*account) {
      std::cout << sg::canonical_dump({{"account_id", client.create_account()}}) << std::endl;
    }
  } catch (const std::exception& e) {
    std::cerr << "sg: " << e.what() << std::endl;
    return sg::client::exit_code_for(e);
  }
  return ec::kOk;
}
