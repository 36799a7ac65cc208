#pragma once

#include <stdexcept>
#include <string>

namespace gaitdict {

// Precondition violated by a caller-supplied value.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or missing on-disk data (CSV, manifests, model files).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad run configuration (flags or config file).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gaitdict
