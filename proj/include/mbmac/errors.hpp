#pragma once

#include <stdexcept>
#include <string>

namespace mbmac {

// Invalid configuration value or malformed config file. CLI exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation. CLI exit code 2.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Requested state space exceeds the configured cap. CLI exit code 2.
struct SizeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical solver failed to converge or found no root. CLI exit code 3.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mbmac
