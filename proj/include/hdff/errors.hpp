#pragma once

#include <stdexcept>
#include <string>

namespace hdff {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched vector, matrix, or tensor shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Caller violated an API precondition (empty input, bad flag value, ...).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// A zero-norm vector reached an angle computation.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unsupported on-disk data.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Training data cannot produce a valid model.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure; the message names the path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace hdff
