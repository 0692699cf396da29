#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace sg {

/// Compact JSON with object keys in ascending bytewise order, UTF-8 output.
/// Throws nlohmann::json::type_error on strings that are not valid UTF-8.
std::string canonical_dump(const nlohmann::json& value);

template <typename T>
std::string canonical_encode(const T& value) {
  return canonical_dump(nlohmann::json(value));
}

/// 64-bit FNV-1a, used for stable token derivation.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace sg
