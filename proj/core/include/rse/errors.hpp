#pragma once

#include <stdexcept>
#include <string>

namespace rse {

/// Malformed configuration or scenario input. CLI exit code 2.
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: divergence, non-finite state, failed synthesis. CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rse
