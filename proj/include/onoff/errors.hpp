#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace onoff {

/// Invalid model or experiment configuration. Carries the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::invalid_argument(key.empty() ? message : key + ": " + message),
        key_(std::move(key)),
        message_(message) {}

  const std::string& key() const noexcept { return key_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string key_;
  std::string message_;
};

/// Parameters are individually valid but outside the regime an operation
/// covers, e.g. an R-scaling quantity requested with two light tails.
class RegimeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace onoff
