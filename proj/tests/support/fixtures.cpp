#include "support/fixtures.hpp"

#include <algorithm>

namespace fixtures {

json job_fields(std::int64_t nodes, std::int64_t walltime_s,
                const std::vector<std::string>& features) {
  return json{{"nodes", nodes},
              {"walltime_s", walltime_s},
              {"required_features", features},
              {"qos_class", "standard"},
              {"command", "./run.sh"},
              {"workdir", "/scratch/job"}};
}

json full_spec(std::int64_t nodes, std::int64_t walltime_s,
               const std::vector<std::string>& features) {
  json j = job_fields(nodes, walltime_s, features);
  j["job_id"] = "0123456789abcdef0123456789abcdef";
  j["user"] = "alice";
  j["secret"] = "alice-secret";
  return j;
}

json cluster_config(const std::string& id, std::int64_t capacity, std::int64_t base_rate,
                    const std::vector<std::string>& capabilities) {
  return json{{"cluster_id", id},
              {"capacity_nodes", capacity},
              {"capabilities", capabilities},
              {"base_rate", base_rate},
              {"load_coefficient", {1, 1}}};
}

sg::harness::Scenario homogeneous_scenario(int clusters, std::int64_t capacity, int jobs,
                                           std::int64_t nodes, std::int64_t walltime_s,
                                           std::uint64_t seed) {
  sg::harness::Scenario s;
  for (int i = 0; i < clusters; ++i) {
    s.clusters.push_back(cluster_config(std::string(1, static_cast<char>('A' + i)), capacity));
  }
  s.users.push_back({"alice", 1'000'000'000, "secret-alice"});
  for (int t = 0; t < jobs; ++t) s.workload.push_back({t, "alice", job_fields(nodes, walltime_s)});
  s.duration_s = jobs + walltime_s * ((jobs + clusters - 1) / clusters) + 1;
  s.seed = seed;
  return s;
}

namespace {

std::int64_t uniform(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

std::string cluster_name(int i) {
  static const char* kNames[] = {"alpha", "bravo", "charlie", "delta", "echo", "foxtrot"};
  return kNames[i];
}

}  // namespace

SpreadCase random_spread_case(std::mt19937_64& rng) {
  for (;;) {
    SpreadCase c;
    c.clusters = static_cast<int>(uniform(rng, 2, 5));
    c.jobs = static_cast<int>(uniform(rng, c.clusters, 3 * c.clusters));
    c.capacity = uniform(rng, 1, 16);
    c.nodes = uniform(rng, 1, c.capacity);
    c.walltime_s = uniform(rng, c.jobs, 200);
    c.base_rate = uniform(rng, 1, 5);
    c.coef_den = uniform(rng, 1, 4);
    c.coef_num = uniform(rng, c.coef_den, 4 * c.coef_den);
    c.horizon_s = uniform(rng, 60, 3600);

    // With at most K = ceil(J/N) jobs per cluster and J arrivals one second
    // apart, a cluster holding one job more than another carries at least
    // nodes * (walltime - K*(J-1)) extra committed node-seconds. Require that
    // gap to be worth at least one millicredit.
    std::int64_t per_cluster = (c.jobs + c.clusters - 1) / c.clusters;
    std::int64_t gap = c.walltime_s - per_cluster * (c.jobs - 1);
    if (gap <= 0) continue;
    __int128 lhs = static_cast<__int128>(c.base_rate) * c.nodes * c.walltime_s * c.coef_num *
                   c.nodes * gap;
    __int128 rhs = static_cast<__int128>(c.capacity) * c.horizon_s * c.coef_den;
    if (lhs >= rhs) return c;
  }
}

sg::harness::Scenario spread_scenario(const SpreadCase& c, std::uint64_t seed) {
  sg::harness::Scenario s;
  for (int i = 0; i < c.clusters; ++i) {
    json cfg = cluster_config(cluster_name(i), c.capacity, c.base_rate);
    cfg["load_coefficient"] = {c.coef_num, c.coef_den};
    cfg["horizon_s"] = c.horizon_s;
    s.clusters.push_back(cfg);
  }
  s.users.push_back({"u", 1'000'000'000'000, "secret-u"});
  for (int t = 0; t < c.jobs; ++t) {
    s.workload.push_back({t, "u", job_fields(c.nodes, c.walltime_s)});
  }
  s.duration_s = c.jobs;
  s.seed = seed;
  return s;
}

sg::harness::Scenario random_market(std::mt19937_64& rng) {
  static const std::vector<std::string> kFeatures = {"deadline", "reservation", "gpu"};
  sg::harness::Scenario s;
  int clusters = static_cast<int>(uniform(rng, 1, 4));
  for (int i = 0; i < clusters; ++i) {
    std::vector<std::string> caps;
    for (const auto& f : kFeatures) {
      if (uniform(rng, 0, 1) == 1) caps.push_back(f);
    }
    json cfg = cluster_config(cluster_name(i), uniform(rng, 2, 16), uniform(rng, 1, 4), caps);
    cfg["load_coefficient"] = {uniform(rng, 0, 3), uniform(rng, 1, 2)};
    cfg["horizon_s"] = uniform(rng, 100, 3600);
    json mult = json::object();
    for (const auto& f : caps) mult[f] = {uniform(rng, 4, 8), 4};
    cfg["feature_multipliers"] = mult;
    if (uniform(rng, 0, 3) == 0) cfg["policy"] = "flat";
    s.clusters.push_back(cfg);
  }
  int users = static_cast<int>(uniform(rng, 1, 3));
  for (int u = 0; u < users; ++u) {
    s.users.push_back({"user" + std::to_string(u), uniform(rng, 0, 20000), ""});
    s.users.back().secret = "secret-" + s.users.back().account;
  }
  int jobs = static_cast<int>(uniform(rng, 0, 12));
  std::int64_t t = 0;
  for (int j = 0; j < jobs; ++j) {
    t += uniform(rng, 0, 3);
    std::vector<std::string> feats;
    for (const auto& f : kFeatures) {
      if (uniform(rng, 0, 3) == 0) feats.push_back(f);
    }
    json spec = job_fields(uniform(rng, 1, 12), uniform(rng, 1, 40), feats);
    if (uniform(rng, 0, 4) == 0) spec["max_price"] = uniform(rng, 50, 2000);
    if (uniform(rng, 0, 5) == 0) spec["qos_class"] = "priority";
    s.workload.push_back({t, "user" + std::to_string(uniform(rng, 0, users - 1)), spec});
  }
  s.duration_s = std::max<std::int64_t>(t + 1, uniform(rng, 1, 60));
  s.seed = rng();
  return s;
}

SilentListener::SilentListener() : sock_(sg::net::listen_on({"127.0.0.1", 0})) {}

std::string unused_address() {
  std::uint16_t port;
  {
    auto s = sg::net::listen_on({"127.0.0.1", 0});
    port = s.local_port();
  }
  return "127.0.0.1:" + std::to_string(port);
}

}  // namespace fixtures
