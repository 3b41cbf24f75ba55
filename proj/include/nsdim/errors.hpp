#pragma once

#include <stdexcept>
#include <string>

namespace nsdim {

// Invalid arguments: bad sizes, out-of-range indices, degenerate boxes.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input outside the domain of a mathematical operation (non-finite values, empty sets).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Failure inside a numerical kernel (decomposition did not converge, overflow).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nsdim
