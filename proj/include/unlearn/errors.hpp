#pragma once

#include <stdexcept>

namespace unlearn {

// Bad user input: malformed files, invalid flags/config. CLI exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failure: factorization breakdown and the like. CLI exit code 3.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace unlearn
