#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace emoface {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes or widths that do not agree with what an operation expects.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A precondition on an argument value was violated (range, emptiness).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf or an otherwise undefined numeric quantity (e.g. a zero-norm
/// vector passed to a cosine).
class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A stored record or file failed its invariants. `line()` is 1-based, or 0
/// when the failure is not tied to a line.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// An annotation response did not follow the mandated format.
class MalformedResponse : public Error {
 public:
  using Error::Error;
};

/// Network or provider failure while talking to an annotation endpoint.
class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace emoface
