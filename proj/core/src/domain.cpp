#include "sg/domain.hpp"

#include <algorithm>

#include "sg/error.hpp"
#include "sg/json_fields.hpp"
#include "sg/net.hpp"

namespace sg {

namespace f = fields;

std::string_view to_string(QosClass q) {
  return q == QosClass::kPriority ? "priority" : "standard";
}

QosClass parse_qos_class(std::string_view s) {
  if (s == "standard") return QosClass::kStandard;
  if (s == "priority") return QosClass::kPriority;
  throw ValidationError("qos_class", "must be \"standard\" or \"priority\"");
}

std::string_view to_string(JobState s) {
  switch (s) {
    case JobState::kQueued: return "QUEUED";
    case JobState::kRunning: return "RUNNING";
    case JobState::kCompleted: return "COMPLETED";
    case JobState::kFailed: return "FAILED";
    case JobState::kRejected: return "REJECTED";
  }
  return "?";
}

JobState parse_job_state(std::string_view s) {
  for (JobState st : kAllJobStates) {
    if (to_string(st) == s) return st;
  }
  throw ValidationError("state", "unknown job state");
}

bool is_feature_token(std::string_view s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](char c) { return (c >= 'a' && c <= 'z') || c == '_'; });
}

bool is_job_id(std::string_view s) {
  return s.size() == 32 && std::all_of(s.begin(), s.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

namespace {

std::set<std::string> decode_token_set(const json& raw, std::string_view field) {
  if (!raw.is_array()) throw ValidationError(std::string(field), "expected an array");
  std::set<std::string> out;
  for (const auto& item : raw) {
    std::string token = f::as_string(item, field);
    if (!is_feature_token(token)) {
      throw ValidationError(std::string(field), "token \"" + token + "\" must match [a-z_]+");
    }
    if (!out.insert(std::move(token)).second) {
      throw ValidationError(std::string(field), "duplicate entry");
    }
  }
  return out;
}

bool is_identifier(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
           return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '_' || c == '-' || c == '.' || c == ':';
         });
}

std::string non_empty_string(const json& obj, std::string_view name) {
  std::string s = f::get_string(obj, name);
  if (s.empty()) throw ValidationError(std::string(name), "must not be empty");
  return s;
}

std::int64_t positive_int(const json& obj, std::string_view name) {
  std::int64_t v = f::get_int(obj, name);
  if (v < 1) throw ValidationError(std::string(name), "must be >= 1");
  return v;
}

std::optional<Seconds> optional_time(const json& obj, std::string_view name) {
  return f::get_optional_int(obj, name);
}

}  // namespace

Money decode_money(const json& raw, std::string_view field) {
  std::int64_t amount = 0;
  if (raw.is_object()) {
    f::reject_unknown(raw, {"amount"});
    amount = f::get_int(raw, "amount");
  } else {
    amount = f::as_int(raw, field);
  }
  if (amount < 0) throw ValidationError(std::string(field), "must be non-negative");
  return Money{amount};
}

JobSpec validate_jobspec(const json& raw) {
  f::require_object(raw, "spec");
  JobSpec spec;

  spec.job_id = f::get_string(raw, "job_id");
  if (!is_job_id(spec.job_id)) {
    throw ValidationError("job_id", "must be 32 lowercase hex characters");
  }
  spec.user = non_empty_string(raw, "user");
  spec.secret = non_empty_string(raw, "secret");
  spec.nodes = positive_int(raw, "nodes");
  spec.walltime_s = positive_int(raw, "walltime_s");
  if (const json* feats = f::find(raw, "required_features")) {
    spec.required_features = decode_token_set(*feats, "required_features");
  }
  if (auto q = f::get_optional_string(raw, "qos_class")) spec.qos_class = parse_qos_class(*q);
  if (const json* mp = f::find(raw, "max_price"); mp != nullptr && !mp->is_null()) {
    spec.max_price = decode_money(*mp, "max_price");
  }
  spec.command = non_empty_string(raw, "command");
  spec.workdir = non_empty_string(raw, "workdir");

  f::reject_unknown(raw, {"job_id", "user", "secret", "nodes", "walltime_s", "required_features",
                          "qos_class", "max_price", "command", "workdir"});
  return spec;
}

ClusterDescriptor decode_cluster_descriptor(const json& raw) {
  f::require_object(raw, "descriptor");
  ClusterDescriptor d;
  d.cluster_id = f::get_string(raw, "cluster_id");
  if (!is_identifier(d.cluster_id)) {
    throw ValidationError("cluster_id", "must be a non-empty identifier");
  }
  d.address = f::get_string(raw, "address");
  parse_endpoint(d.address);
  d.capacity_nodes = positive_int(raw, "capacity_nodes");
  d.capabilities = decode_token_set(f::require(raw, "capabilities"), "capabilities");
  d.base_rate = decode_money(f::require(raw, "base_rate"), "base_rate");
  if (d.base_rate.amount < 1) throw ValidationError("base_rate", "must be >= 1");
  d.payee_account = non_empty_string(raw, "payee_account");
  f::reject_unknown(raw, {"cluster_id", "address", "capacity_nodes", "capabilities", "base_rate",
                          "payee_account"});
  return d;
}

Bid decode_bid(const json& raw) {
  f::require_object(raw, "bid");
  Bid b;
  b.cluster_id = non_empty_string(raw, "cluster_id");
  b.price = decode_money(f::require(raw, "price"), "price");
  b.bid_token = non_empty_string(raw, "bid_token");
  b.expires_at = f::get_int(raw, "expires_at");
  f::reject_unknown(raw, {"cluster_id", "price", "bid_token", "expires_at"});
  return b;
}

JobStatus decode_job_status(const json& raw) {
  f::require_object(raw, "status");
  JobStatus s;
  s.state = parse_job_state(f::get_string(raw, "state"));
  s.submitted_at = optional_time(raw, "submitted_at");
  s.started_at = optional_time(raw, "started_at");
  s.finished_at = optional_time(raw, "finished_at");
  if (auto code = f::get_optional_int(raw, "exit_code")) s.exit_code = static_cast<int>(*code);
  if (s.started_at && s.submitted_at && *s.started_at < *s.submitted_at) {
    throw ValidationError("started_at", "precedes submitted_at");
  }
  if (s.finished_at && s.started_at && *s.finished_at < *s.started_at) {
    throw ValidationError("finished_at", "precedes started_at");
  }
  f::reject_unknown(raw, {"state", "submitted_at", "started_at", "finished_at", "exit_code"});
  return s;
}

void to_json(json& j, const Money& m) { j = json{{"amount", m.amount}}; }

void to_json(json& j, const JobSpec& s) {
  j = json{{"job_id", s.job_id},
           {"user", s.user},
           {"secret", s.secret},
           {"nodes", s.nodes},
           {"walltime_s", s.walltime_s},
           {"required_features", s.required_features},
           {"qos_class", to_string(s.qos_class)},
           {"command", s.command},
           {"workdir", s.workdir}};
  if (s.max_price) j["max_price"] = s.max_price->amount;
}

void to_json(json& j, const ClusterDescriptor& d) {
  j = json{{"cluster_id", d.cluster_id},         {"address", d.address},
           {"capacity_nodes", d.capacity_nodes}, {"capabilities", d.capabilities},
           {"base_rate", d.base_rate.amount},    {"payee_account", d.payee_account}};
}

void to_json(json& j, const Bid& b) {
  j = json{{"cluster_id", b.cluster_id},
           {"price", b.price.amount},
           {"bid_token", b.bid_token},
           {"expires_at", b.expires_at}};
}

void to_json(json& j, const JobStatus& s) {
  j = json{{"state", to_string(s.state)}};
  if (s.submitted_at) j["submitted_at"] = *s.submitted_at;
  if (s.started_at) j["started_at"] = *s.started_at;
  if (s.finished_at) j["finished_at"] = *s.finished_at;
  if (s.exit_code) j["exit_code"] = *s.exit_code;
}

}  // namespace sg
