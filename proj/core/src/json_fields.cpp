#include "sg/json_fields.hpp"

#include <algorithm>

#include "sg/error.hpp"

namespace sg::fields {

void require_object(const json& j, std::string_view what) {
  if (!j.is_object()) throw ValidationError(std::string(what), "expected a JSON object");
}

const json* find(const json& obj, std::string_view name) {
  auto it = obj.find(name);
  return it == obj.end() ? nullptr : &*it;
}

const json& require(const json& obj, std::string_view name) {
  const json* v = find(obj, name);
  if (v == nullptr) throw MissingRequiredField(std::string(name));
  return *v;
}

std::int64_t as_int(const json& value, std::string_view name) {
  if (value.is_number_integer()) {
    if (value.is_number_unsigned() &&
        value.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
      throw ValidationError(std::string(name), "integer out of range");
    }
    return value.get<std::int64_t>();
  }
  throw ValidationError(std::string(name), "expected an integer");
}

std::string as_string(const json& value, std::string_view name) {
  if (!value.is_string()) throw ValidationError(std::string(name), "expected a string");
  return value.get<std::string>();
}

std::string get_string(const json& obj, std::string_view name) {
  return as_string(require(obj, name), name);
}

std::int64_t get_int(const json& obj, std::string_view name) {
  return as_int(require(obj, name), name);
}

bool get_bool(const json& obj, std::string_view name) {
  const json& v = require(obj, name);
  if (!v.is_boolean()) throw ValidationError(std::string(name), "expected a boolean");
  return v.get<bool>();
}

std::optional<std::string> get_optional_string(const json& obj, std::string_view name) {
  const json* v = find(obj, name);
  if (v == nullptr || v->is_null()) return std::nullopt;
  return as_string(*v, name);
}

std::optional<std::int64_t> get_optional_int(const json& obj, std::string_view name) {
  const json* v = find(obj, name);
  if (v == nullptr || v->is_null()) return std::nullopt;
  return as_int(*v, name);
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ValidationError(key, "unknown field");
    }
  }
}

}  // namespace sg::fields
