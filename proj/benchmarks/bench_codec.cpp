#include <random>

#include <benchmark/benchmark.h>

#include "sg/canonical.hpp"
#include "sg/domain.hpp"
#include "sg/wire.hpp"

namespace {

sg::JobSpec sample_spec() {
  sg::JobSpec s;
  s.job_id = "0123456789abcdef0123456789abcdef";
  s.user = "alice";
  s.secret = "alice-secret";
  s.nodes = 16;
  s.walltime_s = 3600;
  s.required_features = {"deadline", "reservation"};
  s.max_price = sg::Money{500000};
  s.command = "./simulate --steps 1000";
  s.workdir = "/scratch/alice/run42";
  return s;
}

void BM_CanonicalEncodeJobSpec(benchmark::State& state) {
  auto spec = sample_spec();
  for (auto _ : state) benchmark::DoNotOptimize(sg::canonical_encode(spec));
}
BENCHMARK(BM_CanonicalEncodeJobSpec);

void BM_ValidateJobSpec(benchmark::State& state) {
  nlohmann::json raw = sample_spec();
  for (auto _ : state) benchmark::DoNotOptimize(sg::validate_jobspec(raw));
}
BENCHMARK(BM_ValidateJobSpec);

void BM_EncodeRequest(benchmark::State& state) {
  sg::wire::RpcRequest req{"17", "node.quote", {{"spec", sample_spec()}}};
  for (auto _ : state) benchmark::DoNotOptimize(sg::wire::encode_message(req));
}
BENCHMARK(BM_EncodeRequest);

void BM_DecodeRequest(benchmark::State& state) {
  auto line = sg::wire::encode_message(sg::wire::RpcRequest{"17", "node.quote", {{"spec", sample_spec()}}});
  line.pop_back();
  for (auto _ : state) benchmark::DoNotOptimize(sg::wire::decode_message(line));
}
BENCHMARK(BM_DecodeRequest);

}  // namespace
