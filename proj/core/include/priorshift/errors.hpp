#pragma once

#include <stdexcept>

namespace priorshift {

// Bad configuration: flags, parameters, missing input paths. CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data. CLI exit code 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace priorshift
