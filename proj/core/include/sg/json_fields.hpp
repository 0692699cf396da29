#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

// Checked accessors for JSON records. Every failure surfaces as a
// ValidationError naming the offending field.
namespace sg::fields {

using nlohmann::json;

void require_object(const json& j, std::string_view what);

const json& require(const json& obj, std::string_view name);
const json* find(const json& obj, std::string_view name);

std::string get_string(const json& obj, std::string_view name);
std::int64_t get_int(const json& obj, std::string_view name);
bool get_bool(const json& obj, std::string_view name);

std::optional<std::string> get_optional_string(const json& obj, std::string_view name);
std::optional<std::int64_t> get_optional_int(const json& obj, std::string_view name);

std::int64_t as_int(const json& value, std::string_view name);
std::string as_string(const json& value, std::string_view name);

/// Rejects keys outside `allowed`.
void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed);

}  // namespace sg::fields
