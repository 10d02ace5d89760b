#pragma once

#include <stdexcept>
#include <string>

namespace fisher_pinn {

/// Bad input: malformed config, mismatched shapes or lengths, missing files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The numerics refused to proceed (CFL violation, non-finite loss or gradient).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fisher_pinn
