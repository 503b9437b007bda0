#pragma once

#include <stdexcept>
#include <string>

namespace bundleconn {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: dimension or arity mismatch, bad slot, unparsable record.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A jet does not carry enough Taylor orders for the requested operation.
class OrderError : public Error {
 public:
  using Error::Error;
};

/// A matrix or jet that must be invertible is singular.
class SingularError : public Error {
 public:
  using Error::Error;
};

}  // namespace bundleconn
