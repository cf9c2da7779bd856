#pragma once

#include <stdexcept>
#include <string>

namespace scaffoldlab {

// Bad user input: malformed series text, inconsistent config, desk-scale cap violations.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A result needed more stored coefficients than the working precision kept.
// The analysis driver catches this and retries with doubled precision.
class PrecisionError : public std::runtime_error {
 public:
  explicit PrecisionError(const std::string& what) : std::runtime_error(what) {}
};

// An identity that must hold by construction failed: indicates a bug, never user input.
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace scaffoldlab
