#pragma once

#include <stdexcept>

namespace ynet {

/// Bad configuration or usage; mapped to exit code 2 by the CLI.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data; mapped to exit code 3 by the CLI.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical failure (NaN loss, degenerate distribution); exit code 4.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ynet
