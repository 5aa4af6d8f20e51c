#pragma once

#include <stdexcept>
#include <string>

namespace gsp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unsupported input file (NPY, CSV, JSON).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Precondition violated by a caller-supplied value.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A required input file does not exist.
class MissingFile : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace gsp
