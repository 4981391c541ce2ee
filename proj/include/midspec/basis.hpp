#pragma once

// Computational-basis index arithmetic for a chain of N sites of dimension d.
// Site 0 is the most significant digit: index = sum_k s_k d^(N-1-k).

#include <cstddef>
#include <sstream>

#include "midspec/errors.hpp"

namespace midspec {

/// d^n, throwing CapExceeded if the result would exceed `cap`.
inline std::size_t checked_pow(std::size_t d, std::size_t n, std::size_t cap) {
  std::size_t out = 1;
  for (std::size_t k = 0; k < n; ++k) {
    if (d != 0 && out > cap / d) {
      std::ostringstream msg;
      msg << "dimension " << d << "^" << n << " exceeds dimension cap " << cap;
      throw CapExceeded(msg.str());
    }
    out *= d;
  }
  if (out > cap) {
    std::ostringstream msg;
    msg << "dimension " << d << "^" << n << " = " << out << " exceeds dimension cap " << cap;
    throw CapExceeded(msg.str());
  }
  return out;
}

inline std::size_t ipow(std::size_t d, std::size_t n) {
  std::size_t out = 1;
  for (std::size_t k = 0; k < n; ++k) out *= d;
  return out;
}

/// Index of the same basis state after cyclically relabelling sites so that
/// site `shift` becomes site 0. `dim` = d^n, `tail` = d^(n-shift).
inline std::size_t rotate_index(std::size_t index, std::size_t tail, std::size_t dim) {
  const std::size_t head = dim / tail;
  return (index % tail) * head + index / tail;
}

}  // namespace midspec
