#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace sg {

using nlohmann::json;

/// Virtual or wall-clock time in whole seconds.
using Seconds = std::int64_t;

/// Integer millicredits; 1 credit = 1000 millicredits.
struct Money {
  std::int64_t amount{0};

  static constexpr std::int64_t kPerCredit = 1000;

  friend constexpr auto operator<=>(const Money&, const Money&) = default;
  friend constexpr Money operator+(Money a, Money b) { return Money{a.amount + b.amount}; }
  friend constexpr Money operator-(Money a, Money b) { return Money{a.amount - b.amount}; }
};

enum class QosClass { kStandard, kPriority };

std::string_view to_string(QosClass q);
QosClass parse_qos_class(std::string_view s);

struct JobSpec {
  std::string job_id;
  std::string user;
  std::string secret;
  std::int64_t nodes{1};
  std::int64_t walltime_s{1};
  std::set<std::string> required_features;
  QosClass qos_class{QosClass::kStandard};
  std::optional<Money> max_price;
  std::string command;
  std::string workdir;

  friend bool operator==(const JobSpec&, const JobSpec&) = default;
};

struct ClusterDescriptor {
  std::string cluster_id;
  std::string address;
  std::int64_t capacity_nodes{1};
  std::set<std::string> capabilities;
  Money base_rate{1};
  std::string payee_account;

  friend bool operator==(const ClusterDescriptor&, const ClusterDescriptor&) = default;
};

struct Bid {
  std::string cluster_id;
  Money price;
  std::string bid_token;
  Seconds expires_at{0};

  friend bool operator==(const Bid&, const Bid&) = default;
};

enum class JobState { kQueued, kRunning, kCompleted, kFailed, kRejected };

inline constexpr JobState kAllJobStates[] = {JobState::kQueued, JobState::kRunning,
                                             JobState::kCompleted, JobState::kFailed,
                                             JobState::kRejected};

std::string_view to_string(JobState s);
JobState parse_job_state(std::string_view s);

/// True only for QUEUED->RUNNING, RUNNING->COMPLETED and RUNNING->FAILED.
constexpr bool is_legal_transition(JobState from, JobState to) {
  switch (from) {
    case JobState::kQueued:
      return to == JobState::kRunning;
    case JobState::kRunning:
      return to == JobState::kCompleted || to == JobState::kFailed;
    default:
      return false;
  }
}

constexpr bool is_terminal(JobState s) {
  return s == JobState::kCompleted || s == JobState::kFailed || s == JobState::kRejected;
}

struct JobStatus {
  JobState state{JobState::kQueued};
  std::optional<Seconds> submitted_at;
  std::optional<Seconds> started_at;
  std::optional<Seconds> finished_at;
  std::optional<int> exit_code;

  friend bool operator==(const JobStatus&, const JobStatus&) = default;
};

/// Token grammar shared by features and capabilities: [a-z_]+
bool is_feature_token(std::string_view s);

/// 32 lowercase hex characters.
bool is_job_id(std::string_view s);

/// Builds a JobSpec from a raw record, enforcing every invariant.
/// Throws ValidationError (or MissingRequiredField) naming the first bad field.
JobSpec validate_jobspec(const json& raw);

ClusterDescriptor decode_cluster_descriptor(const json& raw);
Bid decode_bid(const json& raw);
JobStatus decode_job_status(const json& raw);

/// Accepts either a bare integer or {"amount": n}.
Money decode_money(const json& raw, std::string_view field = "amount");

void to_json(json& j, const Money& m);
void to_json(json& j, const JobSpec& s);
void to_json(json& j, const ClusterDescriptor& d);
void to_json(json& j, const Bid& b);
void to_json(json& j, const JobStatus& s);

inline void from_json(const json& j, Money& m) { m = decode_money(j); }
inline void from_json(const json& j, JobSpec& s) { s = validate_jobspec(j); }
inline void from_json(const json& j, ClusterDescriptor& d) { d = decode_cluster_descriptor(j); }
inline void from_json(const json& j, Bid& b) { b = decode_bid(j); }
inline void from_json(const json& j, JobStatus& s) { s = decode_job_status(j); }

}  // namespace sg
