#pragma once

#include <stdexcept>
#include <string>

namespace wavemgt {

/// Raised when an input violates a documented invariant (domain bounds,
/// parameter admissibility, size mismatch). The message names the bound.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an operation is called outside its precondition.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Non-finite values, non-convergence and similar numerical failures.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wavemgt
