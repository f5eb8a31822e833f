#pragma once

#include <stdexcept>
#include <string>

namespace mahlerlab {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// The requested value is infinite (e.g. K(z) at z = 1, R_F with two zeros).
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// A formula has a vanishing denominator at the requested point.
class SingularPointError : public Error {
 public:
  using Error::Error;
};

// Numerical procedure failed to reach the requested accuracy. Carries the
// best estimate that was available when it gave up.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double best_estimate, double error_estimate)
      : Error(what), best_estimate_(best_estimate), error_estimate_(error_estimate) {}

  double best_estimate() const noexcept { return best_estimate_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double best_estimate_;
  double error_estimate_;
};

class UnsupportedCurveError : public Error {
 public:
  using Error::Error;
};

// Inconsistent arithmetic data, e.g. no functional-equation sign fits.
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace mahlerlab
