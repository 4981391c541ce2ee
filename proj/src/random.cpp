#include "midspec/random.hpp"

#include <cmath>
#include <stdexcept>

namespace midspec {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t parent, StreamKind kind, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(parent) ^ static_cast<std::uint64_t>(kind)) ^ index);
}

std::vector<Complex> complex_gaussian_vector(std::size_t n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  std::vector<Complex> out(n);
  for (auto& z : out) {
    const double re = normal(rng);
    const double im = normal(rng);
    z = Complex(re, im);
  }
  return out;
}

ComplexMatrix gue_matrix(std::size_t n, double variance, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sd = std::sqrt(variance);
  const double off_sd = std::sqrt(variance / 2.0);
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = sd * normal(rng);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double re = normal(rng);
      const double im = normal(rng);
      m(i, j) = Complex(off_sd * re, off_sd * im);
      m(j, i) = std::conj(m(i, j));
    }
  }
  return m;
}

ComplexMatrix haar_unitary(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("haar_unitary: dimension must be positive");
  Rng rng(seed);
  // Columns stored contiguously during orthogonalization.
  std::vector<std::vector<Complex>> cols(n);
  for (auto& c : cols) c = complex_gaussian_vector(n, rng);
  for (std::size_t j = 0; j < n; ++j) {
    auto& cj = cols[j];
    // Two Gram-Schmidt passes keep the columns orthonormal to working precision.
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        const auto& ck = cols[k];
        Complex overlap = 0.0;
        for (std::size_t i = 0; i < n; ++i) overlap += std::conj(ck[i]) * cj[i];
        for (std::size_t i = 0; i < n; ++i) cj[i] -= overlap * ck[i];
      }
    }
    double norm = 0.0;
    for (const auto& z : cj) norm += std::norm(z);
    norm = std::sqrt(norm);
    for (auto& z : cj) z /= norm;
  }
  ComplexMatrix u(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) u(i, j) = cols[j][i];
  }
  return u;
}

}  // namespace midspec
