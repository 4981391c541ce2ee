#pragma once

#include <stdexcept>
#include <string>

namespace midspec {

// Thrown when a computed quantity breaks an invariant that must hold for any
// valid input. Signals a numerical failure rather than a bad argument.
class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A requested Hilbert-space dimension (or job count) exceeds the configured cap.
class CapExceeded : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace midspec
