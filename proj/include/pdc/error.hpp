#pragma once

#include <stdexcept>
#include <string>

namespace pdc {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or data (bad shape, value out of the allowed domain).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A Rényi order that is not usable for a particular pair of distributions,
/// e.g. because the blended parameters leave the parameter space.
class OrderOutOfRange : public Error {
 public:
  using Error::Error;
};

/// The model does not provide what an operation needs (no closed-form
/// predictive, no Fisher information, non-regular model, ...).
class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed: too many non-finite replicates, a divergent
/// fit, a root that could not be bracketed.
class NumericalAbort : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace detail
}  // namespace pdc
