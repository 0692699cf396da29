#pragma once

#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "sg/harness.hpp"
#include "sg/net.hpp"

namespace fixtures {

using nlohmann::json;

/// JobSpec fields a scenario workload item carries (no identity fields).
json job_fields(std::int64_t nodes, std::int64_t walltime_s,
                const std::vector<std::string>& features = {});

/// A complete, valid raw JobSpec.
json full_spec(std::int64_t nodes = 4, std::int64_t walltime_s = 100,
               const std::vector<std::string>& features = {});

/// Front-end config record as a scenario lists it.
json cluster_config(const std::string& id, std::int64_t capacity, std::int64_t base_rate = 1,
                    const std::vector<std::string>& capabilities = {});

/// N identical clusters, one user, `jobs` identical jobs submitted one per second.
sg::harness::Scenario homogeneous_scenario(int clusters, std::int64_t capacity, int jobs,
                                           std::int64_t nodes, std::int64_t walltime_s,
                                           std::uint64_t seed = 1);

/// Parameters of a randomized homogeneous market in which every job is still
/// committed when the last one arrives and one job's worth of load moves the
/// quoted price by at least one millicredit.
struct SpreadCase {
  int clusters;
  int jobs;
  std::int64_t capacity;
  std::int64_t nodes;
  std::int64_t walltime_s;
  std::int64_t base_rate;
  std::int64_t coef_num;
  std::int64_t coef_den;
  std::int64_t horizon_s;
};

SpreadCase random_spread_case(std::mt19937_64& rng);
sg::harness::Scenario spread_scenario(const SpreadCase& c, std::uint64_t seed);

/// Heterogeneous market with features, price caps, several users and some
/// submissions bound to fail.
sg::harness::Scenario random_market(std::mt19937_64& rng);

/// A loopback listener that completes TCP handshakes but never reads or replies.
class SilentListener {
public:
  SilentListener();
  std::string address() const { return "127.0.0.1:" + std::to_string(sock_.local_port()); }

private:
  sg::net::Socket sock_;
};

/// A loopback port that nothing listens on (best effort).
std::string unused_address();

}  // namespace fixtures
