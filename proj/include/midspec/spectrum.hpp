#pragma once

#include <cstdint>
#include <vector>

#include "midspec/entanglement.hpp"
#include "midspec/hamiltonian.hpp"
#include "midspec/linalg.hpp"
#include "midspec/parallel.hpp"

namespace midspec {

struct SpectralData {
  std::size_t n_sites = 0;
  std::size_t local_dim = 0;
  std::vector<double> eigenvalues;  // ascending
  ComplexMatrix eigenvectors;       // column j pairs with eigenvalues[j]
  double s2 = 0.0;                  // tr(H^2)/d^N
  /// Some adjacent gap is below 1e-10 * s. Per-eigenstate quantities inside
  /// a degenerate block then depend on the solver's arbitrary basis choice.
  bool degenerate = false;

  std::size_t dim() const { return eigenvalues.size(); }
  std::vector<Complex> eigenvector(std::size_t j) const { return eigenvectors.column(j); }
};

/// Diagonalizes the assembled Hamiltonian. Throws InvariantError if the mean
/// eigenvalue is not zero (1e-8 s) or the eigenvalue variance differs from
/// tr(H^2)/d^N (1e-8 relative).
SpectralData full_spectrum(const LocalHamiltonian& h,
                           std::size_t dimension_cap = kDefaultDimensionCap,
                           EigenBackend backend = EigenBackend::kAuto);

struct MicrocanonicalWindow {
  double center = 0.0;
  double half_width = 0.0;
  std::vector<std::size_t> indices;  // { j : |E_j - center| <= half_width }, ascending
};

MicrocanonicalWindow microcanonical_window(const SpectralData& sd, double center,
                                           double half_width);

/// Narrowest window around `center` holding at least `min_count` states
/// (more if the boundary falls inside a degenerate block).
MicrocanonicalWindow window_with_count(const SpectralData& sd, double center,
                                       std::size_t min_count);

/// Fraction of eigenvalues in [-|E|, |E|].
double mid_spectrum_fraction(const SpectralData& sd, double energy);

inline constexpr double kDefaultMidSpectrumThreshold = 0.01;

/// True if some window member is within 1e-10 s of another eigenvalue.
bool window_is_basis_dependent(const SpectralData& sd, const MicrocanonicalWindow& w);

struct StateEntropy {
  std::size_t index = 0;
  double entropy = 0.0;
};

struct EntropyStats {
  std::vector<StateEntropy> per_state;  // ordered by index
  double mean = 0.0;
  double variance = 0.0;  // unbiased sample variance; 0 for a single state
  double min = 0.0;
  double max = 0.0;
  double deficit = 0.0;  // L ln d - mean
  double alpha = 1.0;
  bool basis_dependent = false;
};

EntropyStats summarize_entropies(std::vector<StateEntropy> per_state, double max_entropy,
                                 double alpha);

/// Columns = window eigenvectors, in window order.
ComplexMatrix window_basis(const SpectralData& sd, const MicrocanonicalWindow& w);

EntropyStats ensemble_entropy_stats(const SpectralData& sd, const MicrocanonicalWindow& w,
                                    const SubsystemSpec& a, double alpha = 1.0,
                                    std::size_t workers = 1);

/// Entropies of the orthonormal basis V_J U of the window subspace.
EntropyStats rotated_basis_entropies(const SpectralData& sd, const MicrocanonicalWindow& w,
                                     const SubsystemSpec& a, double alpha,
                                     const ComplexMatrix& unitary, std::size_t workers = 1);
/// As above with a seeded Haar-random unitary.
EntropyStats rotated_basis_entropies(const SpectralData& sd, const MicrocanonicalWindow& w,
                                     const SubsystemSpec& a, double alpha,
                                     std::uint64_t rotation_seed, std::size_t workers = 1);

/// Entropies of Haar-random states drawn from span{|Psi_j> : j in J}. Sample
/// s uses the stream derive_seed(seed, kSubspaceSample, s).
EntropyStats subspace_haar_entropy_samples(const SpectralData& sd, const MicrocanonicalWindow& w,
                                           const SubsystemSpec& a, std::size_t n_samples,
                                           std::uint64_t seed, double alpha = 1.0,
                                           std::size_t workers = 1);

/// rho_A = (1/|J|) sum_{j in J} tr_Abar |Psi_j><Psi_j| (block order).
DensityMatrix window_reduced_state(const SpectralData& sd, const MicrocanonicalWindow& w,
                                   const SubsystemSpec& a);

/// Average reduced state of the columns of `states`.
DensityMatrix average_reduced_state(const ComplexMatrix& states, std::size_t n_sites,
                                    std::size_t local_dim, const SubsystemSpec& a);

struct BandDiagnostic {
  std::vector<double> h_a_eigenvalues;  // epsilon_k, ascending
  std::vector<double> probabilities;    // p_k = <a_k|rho_A|a_k>
  double bound = 0.0;                   // -sum p_k ln p_k
  double window_entropy = 0.0;          // S(rho_A)
};

/// Throws InvariantError unless sum p_k = 1 (1e-10) and S(rho_A) <= bound + 1e-9.
BandDiagnostic band_diagnostic(const SpectralData& sd, const MicrocanonicalWindow& w,
                               const HamiltonianSplit& split, const SubsystemSpec& a);

struct ProofDiagnosticReport {
  double center = 0.0;
  double delta = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double lambda = 0.0;                // delta + c2
  bool mirrored = false;              // center > 0: band taken on -H_A
  std::vector<std::size_t> band;      // K
  double m = 0.0;                     // |K| / d_A
  double band_weight = 0.0;           // sum_{k in K} p_k
  double rho_p_weight = 0.0;          // tr(rho P)
  double rho_pk_weight = 0.0;         // tr(rho P_K)
  double band_q_weight = 0.0;         // sum_{k in K} tr(rho |a_k><a_k| (x) Q_{E-eps_k})
  double max_band_q_ratio = 0.0;      // max_{k in K} tr Q_{E-eps_k} / |J|
  double entropy_bound = 0.0;         // -sum_k p_k ln p_k
  double window_entropy = 0.0;        // S(rho_A)
  std::size_t trace_p = 0;            // tr P
  std::size_t trace_q_total = 0;      // sum_k tr Q_{E-eps_k}
  bool band_bound_holds = false;      // band_weight <= m/2 at this size
  bool band_empty = false;
};

ProofDiagnosticReport proof_projector_diagnostic(const SpectralData& sd,
                                                 const MicrocanonicalWindow& w,
                                                 const HamiltonianSplit& split,
                                                 const SubsystemSpec& a, double c1, double c2);

/// Kolmogorov distance between the empirical eigenvalue CDF and N(0, s2).
double gaussianity_check(std::span<const double> eigenvalues, double s2);
double gaussianity_check(const SpectralData& sd);

struct LemmaDeficit {
  double deficit = 0.0;       // L ln d - mean_A S(rho_A) over all N subsystems
  double predictor = 0.0;     // L tr(rho H)^2 / N^2
  double energy = 0.0;        // tr(rho H)
  double mean_entropy = 0.0;
};

LemmaDeficit lemma_l_deficit(const SpectralData& sd, std::size_t subsystem_length,
                             std::size_t state_index);
LemmaDeficit lemma_l_deficit(const LocalHamiltonian& h, std::size_t subsystem_length,
                             const DensityMatrix& rho);

}  // namespace midspec
