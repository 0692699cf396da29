#include "sg/wire.hpp"

#include <algorithm>

#include "sg/canonical.hpp"

namespace sg::wire {

std::string_view to_string(RpcErrorCode code) {
  switch (code) {
    case RpcErrorCode::kMalformed: return "MALFORMED";
    case RpcErrorCode::kUnknownMethod: return "UNKNOWN_METHOD";
    case RpcErrorCode::kInvalidParams: return "INVALID_PARAMS";
    case RpcErrorCode::kApplicationError: return "APPLICATION_ERROR";
    case RpcErrorCode::kTimeout: return "TIMEOUT";
  }
  return "UNKNOWN";
}

bool is_valid_error_code(std::int64_t code) { return code >= 1 && code <= 5; }

bool is_method_name(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
           return (c >= 'a' && c <= 'z') || c == '_' || c == '.';
         });
}

namespace {

std::string frame(const json& body) {
  std::string out = canonical_dump(body);
  out.push_back('\n');
  return out;
}

RpcRequest decode_request(const json& doc, std::string id) {
  const auto& method = doc.at("method");
  if (!method.is_string() || !is_method_name(method.get_ref<const std::string&>())) {
    throw FramingError("method must match [a-z_.]+");
  }
  auto params = doc.find("params");
  if (params == doc.end() || !params->is_object()) {
    throw FramingError("params must be an object");
  }
  for (const auto& [key, _] : doc.items()) {
    if (key != "id" && key != "method" && key != "params") {
      throw FramingError("unexpected request member \"" + key + "\"");
    }
  }
  return RpcRequest{std::move(id), method.get<std::string>(), *params};
}

RpcResponse decode_response(const json& doc, std::string id) {
  bool has_result = doc.contains("result");
  bool has_error = doc.contains("error");
  if (has_result == has_error) {
    throw FramingError("response needs exactly one of result or error");
  }
  if (doc.size() != 2) throw FramingError("unexpected response member");
  if (has_result) return RpcResponse::success(std::move(id), doc.at("result"));

  const json& err = doc.at("error");
  if (!err.is_object() || err.size() != 2 || !err.contains("code") || !err.contains("message")) {
    throw FramingError("error must be {code, message}");
  }
  const json& code = err.at("code");
  const json& message = err.at("message");
  if (!code.is_number_integer() || !message.is_string() ||
      !is_valid_error_code(code.get<std::int64_t>())) {
    throw FramingError("error code or message has the wrong type");
  }
  return RpcResponse::failure(std::move(id), static_cast<RpcErrorCode>(code.get<int>()),
                              message.get<std::string>());
}

}  // namespace

std::string encode_message(const RpcRequest& msg) {
  return frame(json{{"id", msg.id}, {"method", msg.method}, {"params", msg.params}});
}

std::string encode_message(const RpcResponse& msg) {
  if (msg.is_error()) {
    const auto& e = msg.error();
    return frame(json{{"id", msg.id},
                      {"error", {{"code", static_cast<int>(e.code)}, {"message", e.message}}}});
  }
  return frame(json{{"id", msg.id}, {"result", msg.result()}});
}

std::string encode_message(const RpcMessage& msg) {
  return std::visit([](const auto& m) { return encode_message(m); }, msg);
}

RpcMessage decode_message(std::string_view line) {
  if (line.find_first_of("\r\n") != std::string_view::npos) {
    throw FramingError("raw CR or LF inside a message");
  }
  json doc;
  try {
    doc = json::parse(line.begin(), line.end());
  } catch (const json::exception& e) {
    throw FramingError(std::string("not JSON: ") + e.what());
  }
  if (!doc.is_object()) throw FramingError("message must be a JSON object");

  auto id = doc.find("id");
  if (id == doc.end() || !id->is_string()) throw FramingError("missing string id");
  std::string id_text = id->get<std::string>();

  try {
    if (doc.contains("method")) {
      if (id_text.empty()) throw FramingError("request id must not be empty");
      return decode_request(doc, std::move(id_text));
    }
    return decode_response(doc, std::move(id_text));
  } catch (const json::exception& e) {
    throw FramingError(e.what());
  }
}

}  // namespace sg::wire
