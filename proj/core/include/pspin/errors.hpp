#pragma once

#include <stdexcept>
#include <string>

namespace pspin {

// Invalid inputs: out-of-domain arguments, malformed configs, dimension
// mismatches. The CLI maps these to exit code 1.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Requested storage exceeds the configured memory cap.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure at run time (non-convergence, divergence, unstable grid).
// The CLI maps these to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pspin
