#include "sg/pricing.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include "sg/error.hpp"
#include "sg/json_fields.hpp"

namespace sg::pricing {

namespace mp = boost::multiprecision;

Ratio parse_ratio(const nlohmann::json& j, std::string_view field) {
  if (!j.is_array() || j.size() != 2) {
    throw ValidationError(std::string(field), "expected [numerator, denominator]");
  }
  Ratio r{fields::as_int(j[0], field), fields::as_int(j[1], field)};
  if (r.den <= 0 || r.num < 0) {
    throw ValidationError(std::string(field), "needs numerator >= 0 and denominator > 0");
  }
  return r;
}

nlohmann::json ratio_to_json(const Ratio& r) { return nlohmann::json::array({r.num, r.den}); }

std::string_view to_string(PolicyKind k) {
  return k == PolicyKind::kFlat ? "flat" : "load_proportional";
}

PolicyKind parse_policy_kind(std::string_view s) {
  if (s == "load_proportional") return PolicyKind::kLoadProportional;
  if (s == "flat") return PolicyKind::kFlat;
  throw ValidationError("policy", "must be \"load_proportional\" or \"flat\"");
}

void validate_policy(const PricingPolicy& policy, const std::set<std::string>& capabilities) {
  if (policy.base_rate.amount < 1) throw ValidationError("base_rate", "must be >= 1");
  if (policy.load_coefficient.den <= 0 || policy.load_coefficient.num < 0) {
    throw ValidationError("load_coefficient", "must be a non-negative ratio");
  }
  for (const auto& [feature, m] : policy.feature_multipliers) {
    if (!capabilities.contains(feature)) {
      throw ValidationError("feature_multipliers", "\"" + feature + "\" is not an advertised capability");
    }
    if (m.den <= 0 || m.num < m.den) {
      throw ValidationError("feature_multipliers", "multiplier for \"" + feature + "\" must be >= 1");
    }
  }
}

std::optional<Money> compute_price(const PricingPolicy& policy, std::int64_t nodes,
                                   std::int64_t walltime_s,
                                   const std::set<std::string>& features, const Load& load) {
  mp::cpp_rational price = mp::cpp_rational(mp::cpp_int(policy.base_rate.amount) * nodes * walltime_s);

  if (policy.kind == PolicyKind::kLoadProportional) {
    mp::cpp_rational load_ratio(mp::cpp_int(load.committed_node_seconds),
                                mp::cpp_int(load.capacity_nodes) * load.horizon_s);
    mp::cpp_rational coefficient(policy.load_coefficient.num, policy.load_coefficient.den);
    price *= 1 + coefficient * load_ratio;
  }

  for (const auto& feature : features) {
    auto it = policy.feature_multipliers.find(feature);
    if (it != policy.feature_multipliers.end()) {
      price *= mp::cpp_rational(it->second.num, it->second.den);
    }
  }

  mp::cpp_int num = mp::numerator(price);
  mp::cpp_int den = mp::denominator(price);
  mp::cpp_int ceiling = (num + den - 1) / den;
  if (ceiling > std::numeric_limits<std::int64_t>::max()) return std::nullopt;
  return Money{ceiling.convert_to<std::int64_t>()};
}

}  // namespace sg::pricing
