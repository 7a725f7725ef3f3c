#pragma once

#include <stdexcept>
#include <string>

namespace rdpr {

/// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Both ends of a bisection bracket give the same verdict.
class BracketError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// A measurement is zero, so the spectral weights 1 - d / y_i are undefined.
class DegenerateMeasurementError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// A numerical routine failed to produce a trustworthy answer.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adaptive quadrature ran out of subdivisions. Carries the best estimate.
class QuadratureError : public NumericError {
 public:
  QuadratureError(const std::string& what, double estimate, double error_bound)
      : NumericError(what), estimate_(estimate), error_bound_(error_bound) {}

  double estimate() const noexcept { return estimate_; }
  double error_bound() const noexcept { return error_bound_; }

 private:
  double estimate_;
  double error_bound_;
};

/// Iterative eigensolver did not converge.
class EigenError : public NumericError {
 public:
  EigenError(const std::string& what, int iterations)
      : NumericError(what), iterations_(iterations) {}

  int iterations() const noexcept { return iterations_; }

 private:
  int iterations_;
};

}  // namespace rdpr
