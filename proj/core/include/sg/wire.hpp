#pragma once

#include <string>
#include <string_view>
#include <variant>

#include <nlohmann/json.hpp>

#include "sg/error.hpp"

// Message framing shared by every service: one canonical-JSON message per
// line, terminated by a single LF.
namespace sg::wire {

using nlohmann::json;

enum class RpcErrorCode : int {
  kMalformed = 1,
  kUnknownMethod = 2,
  kInvalidParams = 3,
  kApplicationError = 4,
  kTimeout = 5,
};

std::string_view to_string(RpcErrorCode code);
bool is_valid_error_code(std::int64_t code);

struct RpcRequest {
  std::string id;
  std::string method;
  json params = json::object();

  friend bool operator==(const RpcRequest&, const RpcRequest&) = default;
};

struct RpcErrorBody {
  RpcErrorCode code{RpcErrorCode::kApplicationError};
  std::string message;

  friend bool operator==(const RpcErrorBody&, const RpcErrorBody&) = default;
};

struct RpcResponse {
  /// Echoes the request id; empty only when answering an unparseable line.
  std::string id;
  std::variant<json, RpcErrorBody> outcome;

  bool is_error() const { return std::holds_alternative<RpcErrorBody>(outcome); }
  const json& result() const { return std::get<json>(outcome); }
  const RpcErrorBody& error() const { return std::get<RpcErrorBody>(outcome); }

  static RpcResponse success(std::string id, json result) {
    return RpcResponse{std::move(id), std::move(result)};
  }
  static RpcResponse failure(std::string id, RpcErrorCode code, std::string message) {
    return RpcResponse{std::move(id), RpcErrorBody{code, std::move(message)}};
  }

  friend bool operator==(const RpcResponse&, const RpcResponse&) = default;
};

using RpcMessage = std::variant<RpcRequest, RpcResponse>;

/// Framing violation; always maps to RpcErrorCode::kMalformed.
class FramingError : public Error {
public:
  explicit FramingError(const std::string& detail) : Error("MALFORMED", detail) {}
};

/// Matches [a-z_.]+
bool is_method_name(std::string_view s);

std::string encode_message(const RpcRequest& msg);
std::string encode_message(const RpcResponse& msg);
std::string encode_message(const RpcMessage& msg);

/// Inverse of encode_message. `line` excludes its terminating LF.
/// Never crashes on arbitrary input; throws FramingError instead.
RpcMessage decode_message(std::string_view line);

}  // namespace sg::wire
