#pragma once

#include <stdexcept>

namespace qfl {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Qubit count or node capacity limit exceeded.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Qubit or element index out of range.
class IndexError : public Error {
 public:
  using Error::Error;
};

// Mismatched vector/matrix dimensions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Input cannot be normalized (zero vector).
class NormalizationError : public Error {
 public:
  using Error::Error;
};

// Caller violated an operation precondition.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents: bad magic, truncated payload, unknown dtype.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Well-formed file using a layout this reader does not support.
class UnsupportedLayoutError : public FormatError {
 public:
  using FormatError::FormatError;
};

// A named resource (file, archive member) does not exist.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

// Run-configuration schema violation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Filesystem read/write failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace qfl
