#pragma once

#include <stdexcept>

namespace adapt {

// Input or parameter violates a documented invariant.
// The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numeric failure while computing (divergent simulation, non-contractive
// family). The CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace adapt
