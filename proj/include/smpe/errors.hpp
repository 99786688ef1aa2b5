#pragma once

#include <stdexcept>
#include <string>

namespace smpe {

/// Invalid configuration: unknown keys, out-of-range values, dimension mismatches.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Caller violated an operation precondition (e.g. action out of range).
class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure during training: non-finite activations, gradients or losses.
class TrainingFault : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace smpe
