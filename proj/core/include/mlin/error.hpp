#pragma once

#include <stdexcept>
#include <string>

namespace mlin {

/// Tensor shape violation (mismatched operands, bad reshape, ...).
/// Messages name the offending shapes.
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration: unknown key, unparsable value, inconsistent
/// hyperparameters, unknown operator name.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or truncated data file. Messages carry the file path and,
/// where applicable, the byte offset of the failure.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mlin
