#include "support/generators.hpp"

#include <stdexcept>

#include "sg/scheduler.hpp"

namespace generators {

using nlohmann::json;
using sg::wire::RpcErrorCode;
using sg::wire::RpcRequest;
using sg::wire::RpcResponse;

json random_value(std::mt19937_64& rng, int depth) {
  int pick = static_cast<int>(rng() % (depth > 0 ? 7 : 5));
  switch (pick) {
    case 0: return nullptr;
    case 1: return rng() % 2 == 0;
    case 2: return static_cast<std::int64_t>(rng()) >> (rng() % 64);
    case 3: {
      std::string s;
      int n = static_cast<int>(rng() % 12);
      for (int i = 0; i < n; ++i) {
        switch (rng() % 8) {
          case 0: s += static_cast<char>(rng() % 0x20); break;
          case 1: s += "\xc3\xa9"; break;
          default: s += static_cast<char>(0x20 + rng() % 0x5f);
        }
      }
      return s;
    }
    case 4: return static_cast<std::uint64_t>(rng() % 1000);
    case 5: {
      json a = json::array();
      int n = static_cast<int>(rng() % 4);
      for (int i = 0; i < n; ++i) a.push_back(random_value(rng, depth - 1));
      return a;
    }
    default: {
      json o = json::object();
      int n = static_cast<int>(rng() % 4);
      for (int i = 0; i < n; ++i) o["k" + std::to_string(rng() % 100)] = random_value(rng, depth - 1);
      return o;
    }
  }
}

namespace {

std::string random_id(std::mt19937_64& rng) {
  std::string id = std::to_string(rng() % 100000);
  if (rng() % 3 == 0) id += "-x\n\"";
  return id;
}

std::string random_method(std::mt19937_64& rng) {
  static const std::string kAlphabet = "abcdefghijklmnopqrstuvwxyz_.";
  std::string s;
  int n = 1 + static_cast<int>(rng() % 16);
  for (int i = 0; i < n; ++i) s += kAlphabet[rng() % kAlphabet.size()];
  return s;
}

}  // namespace

sg::wire::RpcMessage random_message(std::mt19937_64& rng) {
  if (rng() % 2 == 0) {
    json params = json::object();
    int n = static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) params["p" + std::to_string(i)] = random_value(rng, 3);
    return RpcRequest{random_id(rng), random_method(rng), params};
  }
  if (rng() % 2 == 0) return RpcResponse::success(random_id(rng), random_value(rng, 3));
  auto code = static_cast<RpcErrorCode>(1 + rng() % 5);
  std::string text = rng() % 2 ? "Kind: detail" : "line\nbreak";
  return RpcResponse::failure(random_id(rng), code, text);
}

FifoRun random_fifo_run(std::mt19937_64& rng) {
  auto draw = [&](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
  };
  FifoRun run{draw(1, 16), {}};
  int jobs = static_cast<int>(draw(0, 30));
  std::int64_t t = 0;
  for (int i = 0; i < jobs; ++i) {
    t += draw(0, 6);
    run.arrivals.push_back({t, "j" + std::to_string(i), draw(1, run.capacity), draw(1, 25)});
  }
  return run;
}

std::map<std::string, std::pair<std::int64_t, std::int64_t>> drive_scheduler(const FifoRun& run,
                                                                             bool* capacity_ok) {
  sg::sched::BatchScheduler s(run.capacity);
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> seen;
  std::size_t next = 0;
  std::size_t completed = 0;
  while (completed < run.arrivals.size()) {
    while (next < run.arrivals.size() && run.arrivals[next].at == s.clock()) {
      const auto& a = run.arrivals[next++];
      s.submit(a.job_id, a.nodes, a.walltime);
    }
    for (const auto& ev : s.tick(1)) {
      if (ev.state == sg::JobState::kRunning) seen[ev.job_id].first = ev.time;
      if (ev.state == sg::JobState::kCompleted) {
        seen[ev.job_id].second = ev.time;
        ++completed;
      }
    }
    if (s.running_nodes() > s.capacity_nodes() && capacity_ok) *capacity_ok = false;
    if (s.clock() > 1'000'000) throw std::runtime_error("scheduler did not drain");
  }
  return seen;
}

}  // namespace generators
