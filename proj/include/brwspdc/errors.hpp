#pragma once

#include <stdexcept>
#include <string>

namespace brwspdc {

// Base of every error thrown by the library. The CLI maps the concrete
// subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Wavelength (or other argument) outside the range a model is trusted in.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Caller broke a documented precondition (e.g. non-normalized profile).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Malformed or missing configuration / data file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Root refinement or search did not converge. Carries the last bracket.
class NumericFailure : public Error {
 public:
  NumericFailure(const std::string& what, double lo, double hi)
      : Error(what + " (bracket [" + std::to_string(lo) + ", " + std::to_string(hi) + "])"),
        lo_(lo),
        hi_(hi) {}

  double bracket_lo() const { return lo_; }
  double bracket_hi() const { return hi_; }

 private:
  double lo_;
  double hi_;
};

// A requested mode (or phase-matched point) does not exist.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

}  // namespace brwspdc
