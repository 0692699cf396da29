#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cli_support.hpp"
#include "sg/canonical.hpp"
#include "sg/harness.hpp"
#include "sg/log.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Deterministic in-process market simulation"};
  std::string scenario_path;
  std::string report_path;
  bool check_replay = false;
  app.add_option("--scenario", scenario_path, "scenario.json")->required();
  app.add_option("--report", report_path, "Where to write the report JSON")->required();
  app.add_flag("--check-replay", check_replay, "Run twice and fail unless reports match");
  CLI11_PARSE(app, argc, argv);

  sg::log::set_level(sg::log::Level::kError);
  sg::harness::Scenario scenario;
  try {
    scenario = sg::harness::Scenario::from_json(sg::cli::read_json_file(scenario_path));
  } catch (const std::exception& e) {
    std::cerr << "sg-sim: ScenarioInvalid: " << e.what() << std::endl;
    return 2;
  }

  try {
    auto report = sg::harness::run_scenario(scenario);
    std::string bytes = sg::canonical_dump(report.to_json());
    if (check_replay) {
      std::string again = sg::canonical_dump(sg::harness::run_scenario(scenario).to_json());
      if (again != bytes) {
        std::cerr << "sg-sim: replay produced a different report" << std::endl;
        return 3;
      }
    }
    std::ofstream out(report_path, std::ios::trunc);
    if (!out) throw sg::Error("ReportUnwritable", report_path);
    out << bytes << '\n';
  } catch (const std::exception& e) {
    std::cerr << "sg-sim: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
