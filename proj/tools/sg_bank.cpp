#include <iostream>

#include <CLI11.hpp>

#include "cli_support.hpp"
#include "sg/bank_service.hpp"
#include "sg/log.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Account and escrow service"};
  std::string config_path;
  bool verbose = false;
  app.add_option("--config", config_path, "bank.json")->required();
  app.add_flag("-v,--verbose", verbose, "Log at info level");
  CLI11_PARSE(app, argc, argv);

  if (verbose) sg::log::set_level(sg::log::Level::kInfo);
  try {
    sg::cli::block_shutdown_signals();
    auto config = sg::bank::BankConfig::from_json(sg::cli::read_json_file(config_path));
    sg::bank::BankService service(config);
    std::cerr << "sg-bank listening on " << service.address() << std::endl;
    sg::cli::wait_for_shutdown_signal();
    service.stop();
  } catch (const std::exception& e) {
    std::cerr << "sg-bank: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
