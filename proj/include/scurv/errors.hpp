#pragma once

#include <stdexcept>
#include <string>

namespace scurv {

// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// A documented precondition of an operation does not hold.
struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Requested object exceeds a configured size budget.
struct ResourceError : std::length_error {
  using std::length_error::length_error;
};

// Iterative method failed to converge, or a computation lost accuracy.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace scurv
