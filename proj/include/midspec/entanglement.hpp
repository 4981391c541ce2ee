#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "midspec/hamiltonian.hpp"
#include "midspec/linalg.hpp"

namespace midspec {

/// Hermitian, unit-trace operator on a named subsystem. Positivity is
/// enforced when a spectrum is taken (see spectrum_probabilities).
class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix matrix, std::string label = {});

  static DensityMatrix maximally_mixed(std::size_t dim, std::string label = {});

  std::size_t dim() const { return matrix_.rows(); }
  const ComplexMatrix& matrix() const { return matrix_; }
  const std::string& label() const { return label_; }

 private:
  ComplexMatrix matrix_;
  std::string label_;
};

class PureState {
 public:
  /// Requires unit norm within 1e-12.
  explicit PureState(std::vector<Complex> amplitudes);
  /// Rescales to unit norm; rejects the zero vector.
  static PureState normalized(std::vector<Complex> amplitudes);

  std::size_t dim() const { return amplitudes_.size(); }
  std::span<const Complex> amplitudes() const { return amplitudes_; }

 private:
  std::vector<Complex> amplitudes_;
};

/// rho_A = tr_Abar |psi><psi|. Wrapping subsystems are rotated to the leading
/// sites first, so the result is in block order (a.start first).
DensityMatrix partial_trace(std::span<const Complex> state, std::size_t n_sites,
                            std::size_t local_dim, const SubsystemSpec& a);
DensityMatrix partial_trace(const DensityMatrix& rho, std::size_t n_sites, std::size_t local_dim,
                            const SubsystemSpec& a);

/// Nonzero part of the entanglement spectrum of a pure state across A|Abar,
/// from whichever Gram matrix is smaller. Ascending.
std::vector<double> schmidt_probabilities(std::span<const Complex> state, std::size_t n_sites,
                                          std::size_t local_dim, const SubsystemSpec& a);

/// Eigenvalues of rho clamped at zero. Eigenvalues below -1e-10 are rejected
/// with InvariantError.
std::vector<double> spectrum_probabilities(const DensityMatrix& rho);

/// -sum p ln p for alpha == 1, else ln(sum p^alpha)/(1-alpha). 0 ln 0 := 0.
double entropy_of_distribution(std::span<const double> probabilities, double alpha = 1.0);

double von_neumann_entropy(const DensityMatrix& rho);
double renyi_entropy(const DensityMatrix& rho, double alpha);

/// Entanglement entropy S_alpha(psi_A) of a pure state (alpha = 1: von Neumann).
double entanglement_entropy(std::span<const Complex> state, std::size_t n_sites,
                            std::size_t local_dim, const SubsystemSpec& a, double alpha = 1.0);

PureState haar_state(std::size_t dim, std::uint64_t seed);

struct PageMean {
  double exact = 0.0;       // finite harmonic sum
  double asymptotic = 0.0;  // ln d_A - d_A / (2 d_Abar)
};

/// Mean entanglement entropy of a Haar-random state on C^d_a (x) C^d_abar.
/// Symmetric in its arguments: the smaller dimension is taken as d_A.
PageMean page_mean(std::uint64_t d_a, std::uint64_t d_abar);

/// Conjectured large-N deficit (delta_{f,1/2} - f - ln(1-f))/2 at f = L/N,
/// qubit chains only. The delta term fires iff 2L == N.
double conjecture_gap(std::size_t subsystem_length, std::size_t n_sites,
                      std::size_t local_dim = 2);

}  // namespace midspec
