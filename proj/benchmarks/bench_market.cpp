#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "sg/broker.hpp"
#include "sg/pricing.hpp"
#include "sg/scheduler.hpp"

namespace {

void BM_ComputePrice(benchmark::State& state) {
  sg::pricing::PricingPolicy policy;
  policy.base_rate = sg::Money{3};
  policy.load_coefficient = {3, 2};
  policy.feature_multipliers = {{"deadline", {5, 4}}, {"reservation", {11, 10}}};
  sg::pricing::Load load{123456, 64, 3600};
  for (auto _ : state) {
    benchmark::DoNotOptimize(sg::pricing::compute_price(policy, 16, 3600, {"deadline", "reservation"}, load));
  }
}
BENCHMARK(BM_ComputePrice);

void BM_SchedulerTick(benchmark::State& state) {
  const auto jobs = state.range(0);
  for (auto _ : state) {
    state.PauseTiming();
    sg::sched::BatchScheduler s(64);
    std::mt19937_64 rng(1);
    for (std::int64_t i = 0; i < jobs; ++i) {
      s.submit("j" + std::to_string(i), 1 + static_cast<std::int64_t>(rng() % 64),
               1 + static_cast<std::int64_t>(rng() % 100));
    }
    state.ResumeTiming();
    while (!s.queue().empty() || !s.running().empty()) benchmark::DoNotOptimize(s.tick(1));
  }
}
BENCHMARK(BM_SchedulerTick)->Arg(100)->Arg(1000);

void BM_SelectWinner(benchmark::State& state) {
  std::vector<sg::Bid> bids;
  std::mt19937_64 rng(2);
  for (int i = 0; i < state.range(0); ++i) {
    bids.push_back({"c" + std::to_string(i), sg::Money{static_cast<std::int64_t>(rng() % 1000)}, "t", 0});
  }
  for (auto _ : state) benchmark::DoNotOptimize(sg::broker::select_winner(bids));
}
BENCHMARK(BM_SelectWinner)->Arg(4)->Arg(64);

}  // namespace
