#pragma once

#include <stdexcept>
#include <string>

namespace gelo {

/// Invalid input: bad arguments, malformed files, violated preconditions.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not produce a trustworthy result
/// (non-convergence, unidentifiable parameters, argument out of range).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gelo
