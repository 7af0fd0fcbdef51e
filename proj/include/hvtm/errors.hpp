#pragma once

#include <stdexcept>
#include <string>

namespace hvtm {

// Bad parameters, mismatched dimensions, invalid run configuration.
// CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or unreadable input data (files, records, serialized models).
// CLI maps this to exit code 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hvtm
