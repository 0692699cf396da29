#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "oracle/event_list_simulator.hpp"
#include "sg/wire.hpp"

namespace generators {

/// Arbitrary JSON: nulls, booleans, integers, strings with control and
/// multibyte characters, and nested arrays/objects up to `depth`.
nlohmann::json random_value(std::mt19937_64& rng, int depth);

/// A valid request or response.
sg::wire::RpcMessage random_message(std::mt19937_64& rng);

struct FifoRun {
  std::int64_t capacity;
  std::vector<oracle::Arrival> arrivals;
};

/// Up to 30 jobs on a 1..16 node machine, arriving 0..6 s apart.
FifoRun random_fifo_run(std::mt19937_64& rng);

/// Feeds the run through BatchScheduler one second at a time and returns
/// job_id -> (start, finish). Sets *capacity_ok to false if the running node
/// count ever exceeds capacity.
std::map<std::string, std::pair<std::int64_t, std::int64_t>> drive_scheduler(const FifoRun& run,
                                                                             bool* capacity_ok);

}  // namespace generators
