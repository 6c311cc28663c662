#pragma once

#include <stdexcept>

namespace mobgen {

// Failure classes that map onto the CLI's exit-code contract:
// IoError -> 2, DataError -> 3, CompatError -> 4.

/// Filesystem read/write failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data violates its schema or is otherwise unusable.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A checkpoint, config or statistics file does not match what it is used with.
class CompatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mobgen
