#pragma once

#include <stdexcept>
#include <string>

namespace agestruct {

/// Malformed or inconsistent scenario input. Carries the offending field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A standing model assumption (positivity, monotonicity, limits) does not hold.
class AssumptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a mathematical operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The requested value lies outside the range of the function being inverted.
class NoSolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation requested outside its mathematical precondition (e.g. equilibrium of a subcritical model).
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Evaluation outside a stored time or age range.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Iterative method failed: step-size underflow, non-convergence, lost positivity.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Truncated improper integral whose tail bound exceeds the requested budget.
class TruncationError : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace agestruct

namespace agestruct {

/// Normalized age profile requested where the population has gone extinct.
class DegenerateProfileError : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

}  // namespace agestruct
