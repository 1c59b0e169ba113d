#pragma once

#include <stdexcept>
#include <string>

namespace rmt {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Evaluation point outside the support of a density.
class SupportError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Base for failures of a numerical method on valid input.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A series or recurrence could not deliver the requested precision.
class AccuracyLossError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Adaptive quadrature hit its subdivision cap before meeting tolerance.
class ConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Moment matrix determinant vanished, or a family is degenerate.
class SingularSystemError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Histogram bins not covered by the grid of an analytic curve.
class CoverageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace rmt
