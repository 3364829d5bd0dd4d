#pragma once

#include <stdexcept>
#include <string>

namespace speckle {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (bad parameter, wrong flag).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Input data could not be read or is unusable (corrupt file, ROI outside image).
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace speckle
