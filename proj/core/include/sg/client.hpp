#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sg/domain.hpp"
#include "sg/error.hpp"

namespace sg::client {

using nlohmann::json;

struct ClientConfig {
  std::string broker;
  std::string bank;
  std::string user;
  std::string secret;
  std::string account_id;
  std::optional<std::uint64_t> rng_seed;
  std::int64_t timeout_ms{10000};

  static ClientConfig from_json(const json& j);
};

/// Command-line values that take precedence over the spec file.
struct SpecOverrides {
  std::optional<std::int64_t> nodes;
  std::optional<std::int64_t> walltime_s;
  std::optional<std::vector<std::string>> features;
  std::optional<std::int64_t> max_price;
  std::optional<std::string> qos_class;
  std::optional<std::string> command;
  std::optional<std::string> workdir;
};

/// Values used only when neither the file nor the flags supply them.
struct SpecDefaults {
  std::string job_id;
  std::string user;
  std::string secret;
};

/// Merges defaults < file fields < overrides and validates the result.
/// Throws MissingRequiredField or ValidationError.
JobSpec parse_spec(const json& file_fields, const SpecOverrides& overrides,
                   const SpecDefaults& defaults);

/// Reads a flat JSON object of JobSpec fields.
json load_spec_file(const std::string& path);

struct SubmissionReceipt {
  std::string job_id;
  std::string cluster_id;
  std::string address;
  Money price;
  std::string escrow_id;

  friend bool operator==(const SubmissionReceipt&, const SubmissionReceipt&) = default;
};

void to_json(json& j, const SubmissionReceipt& r);

/// The front-end refused the job; the escrow has been refunded (or the
/// refund attempt is described in the message).
class SubmissionRejected : public Error {
public:
  SubmissionRejected(std::string cause_kind, const std::string& detail)
    : Error("SubmissionRejected", cause_kind + ": " + detail), cause_kind_(std::move(cause_kind)) {}
  const std::string& cause_kind() const { return cause_kind_; }

private:
  std::string cause_kind_;
};

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kOther = 1;
inline constexpr int kNoEligibleCluster = 2;
inline constexpr int kInsufficientFunds = 3;
inline constexpr int kUnknown = 4;
inline constexpr int kRejected = 5;
}  // namespace exit_code

/// Maps a failure raised by Client to the process exit code.
int exit_code_for(const std::exception& e);

/// The user-facing driver of the job lifecycle. Single-threaded.
class Client {
public:
  explicit Client(ClientConfig config);

  /// 32 lowercase hex characters from the seeded generator.
  std::string mint_job_id();

  /// validate -> broker selection -> escrow hold -> submission. A rejected
  /// submission is refunded before SubmissionRejected is thrown.
  SubmissionReceipt submit_job(const json& spec_fields, const SpecOverrides& overrides = {});

  JobStatus job_status(const std::string& job_id, const std::string& node_address) const;
  Money balance() const;
  Money deposit(Money amount) const;
  std::string create_account() const;

  const ClientConfig& config() const { return config_; }

private:
  json call(const std::string& address, std::string_view method, const json& params) const;

  ClientConfig config_;
  std::mt19937_64 rng_;
};

}  // namespace sg::client
