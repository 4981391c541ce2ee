#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "midspec/linalg.hpp"

namespace midspec {

using Rng = std::mt19937_64;

// Independent pseudo-random streams are keyed on (kind, index) under a parent
// seed, so every draw is fixed by the parent seed regardless of scheduling.
enum class StreamKind : std::uint64_t {
  kModel = 1,
  kRotation = 2,
  kHaarState = 3,
  kSubspaceSample = 4,
  kSweepCell = 5,
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t parent, StreamKind kind, std::uint64_t index);

/// i.i.d. complex normals with E|z|^2 = 1.
std::vector<Complex> complex_gaussian_vector(std::size_t n, Rng& rng);

/// Gaussian unitary ensemble sample with E|h_ij|^2 = variance.
ComplexMatrix gue_matrix(std::size_t n, double variance, Rng& rng);

/// Haar-distributed unitary (Gram-Schmidt QR of a Ginibre matrix; R has a
/// positive diagonal so no phase correction is needed).
ComplexMatrix haar_unitary(std::size_t n, std::uint64_t seed);

}  // namespace midspec
