#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "sg/domain.hpp"

namespace sg::pricing {

/// Non-negative rational p/q with q > 0.
struct Ratio {
  std::int64_t num{0};
  std::int64_t den{1};

  friend bool operator==(const Ratio&, const Ratio&) = default;
};

/// Parses [p, q].
Ratio parse_ratio(const nlohmann::json& j, std::string_view field);
nlohmann::json ratio_to_json(const Ratio& r);

enum class PolicyKind { kLoadProportional, kFlat };

std::string_view to_string(PolicyKind k);
PolicyKind parse_policy_kind(std::string_view s);

struct PricingPolicy {
  PolicyKind kind{PolicyKind::kLoadProportional};
  Money base_rate{1};
  Ratio load_coefficient{1, 1};
  /// Surcharge per advertised feature; features without an entry cost 1x.
  std::map<std::string, Ratio> feature_multipliers;
};

/// Throws ValidationError unless base_rate >= 1, the load coefficient is a
/// non-negative ratio, and every multiplier is >= 1 and names an advertised
/// capability.
void validate_policy(const PricingPolicy& policy, const std::set<std::string>& capabilities);

/// Committed work relative to capacity over the normalization horizon:
/// load_ratio = committed_node_seconds / (capacity_nodes * horizon_s).
struct Load {
  std::int64_t committed_node_seconds{0};
  std::int64_t capacity_nodes{1};
  std::int64_t horizon_s{3600};
};

/// Price in millicredits for running `nodes` x `walltime_s` under `policy`:
///
///   ceil(base_rate * nodes * walltime_s
///        * (1 + load_coefficient * load_ratio)      [load_proportional only]
///        * product of feature_multipliers[f] for f in features)
///
/// evaluated in exact rational arithmetic. Returns nullopt when the result
/// does not fit in 64 bits.
std::optional<Money> compute_price(const PricingPolicy& policy, std::int64_t nodes,
                                   std::int64_t walltime_s,
                                   const std::set<std::string>& features, const Load& load);

}  // namespace sg::pricing
