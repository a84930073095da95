#pragma once

#include <stdexcept>
#include <string>

namespace tdcnn {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor extents or channel/width counts that do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Bad arguments to an operation (negative stddev, k larger than the data, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed or unreadable input files and datasets.
class DataError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf in a loss, gradient or probability row.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace tdcnn
