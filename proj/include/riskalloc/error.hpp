#pragma once

#include <stdexcept>
#include <string>

namespace riskalloc {

/// Invalid configuration. `field()` is the dotted path of the offending entry,
/// e.g. "network.terminals[1].alpha".
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& reason)
      : std::invalid_argument(field + ": " + reason), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace riskalloc
