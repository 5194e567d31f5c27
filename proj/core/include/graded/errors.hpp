#pragma once

#include <stdexcept>
#include <string>

namespace graded {

/// Base of every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands live on different charts.
class ChartMismatch : public Error {
 public:
  using Error::Error;
};

/// A parity or weight constraint was violated.
class GradingError : public Error {
 public:
  using Error::Error;
};

/// grade_of() on an expression whose terms disagree on (parity, multiweight).
class InhomogeneousError : public Error {
 public:
  InhomogeneousError(std::string message, std::string first, std::string second)
      : Error(std::move(message)), first_term(std::move(first)), second_term(std::move(second)) {}

  std::string first_term;
  std::string second_term;
};

/// A coordinate map does not assign every required coordinate.
class IncompleteMap : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

/// Input lies outside the operation's domain (wrong chart kind, non-base function...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A required verification has not been performed or did not pass.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Internal identity that must hold by construction failed.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace graded
