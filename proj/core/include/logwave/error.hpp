#pragma once

#include <stdexcept>
#include <string>

namespace logwave {

/// Invalid configuration. `field()` is the dotted path of the offending
/// entry (e.g. "problem.q"), empty when the error is not tied to one key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A numerical routine could not produce a trustworthy answer
/// (no sign change on a bracket, exhausted search grid, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace logwave
