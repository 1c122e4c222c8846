#pragma once

#include <stdexcept>
#include <string>

namespace moml {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector/matrix shapes that do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A NaN or Inf was produced, or an iteration diverged.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Arguments outside an operation's contract (empty sets, non-positive step sizes, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace moml
