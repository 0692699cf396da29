#pragma once

#include <stdexcept>
#include <string>

namespace sg {

/// Application-level failure with a machine-readable kind.
///
/// what() renders as "<kind>: <detail>" so the kind survives a trip over the
/// wire inside an RPC error message.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& detail)
    : std::runtime_error(detail.empty() ? kind : kind + ": " + detail),
      kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

/// A record failed validation; field() names the first offending field.
class ValidationError : public Error {
public:
  ValidationError(std::string field, std::string reason)
    : ValidationError("ValidationError", std::move(field), std::move(reason)) {}

  const std::string& field() const noexcept { return field_; }
  const std::string& reason() const noexcept { return reason_; }

protected:
  ValidationError(std::string kind, std::string field, std::string reason)
    : Error(std::move(kind), field + ": " + reason),
      field_(std::move(field)),
      reason_(std::move(reason)) {}

private:
  std::string field_;
  std::string reason_;
};

class MissingRequiredField : public ValidationError {
public:
  explicit MissingRequiredField(std::string field)
    : ValidationError("MissingRequiredField", std::move(field), "required field is missing") {}
};

/// Extracts the kind prefix from an Error::what() string ("Kind: detail").
inline std::string error_kind_of(const std::string& message) {
  auto pos = message.find(": ");
  return pos == std::string::npos ? message : message.substr(0, pos);
}

}  // namespace sg
