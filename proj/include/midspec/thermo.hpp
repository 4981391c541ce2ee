#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "midspec/entanglement.hpp"
#include "midspec/hamiltonian.hpp"
#include "midspec/linalg.hpp"
#include "midspec/spectrum.hpp"

namespace midspec {

/// Largest |beta| * (lambda_max - lambda_min) accepted before exponentiating.
inline constexpr double kBetaSpreadCap = 700.0;

/// exp(-beta h_a) / tr exp(-beta h_a), with the spectrum shifted before
/// exponentiation.
DensityMatrix thermal_state(const ComplexMatrix& h_a, double beta);

/// Thermal quantities of the length-L blocks, averaged over every block.
/// Holds the spectrum of each block Hamiltonian.
class ThermoModel {
 public:
  /// All N contiguous blocks of a periodic chain. Requires 2 <= L < N.
  ThermoModel(const LocalHamiltonian& h, std::size_t subsystem_length);
  /// Explicit block spectra (each of size local_dim^L).
  ThermoModel(std::vector<std::vector<double>> block_spectra, std::size_t subsystem_length,
              std::size_t local_dim);

  std::size_t subsystem_length() const { return length_; }
  std::size_t local_dim() const { return local_dim_; }
  std::size_t block_count() const { return spectra_.size(); }
  double max_entropy() const;

  /// Average of tr(sigma_A H_A).
  double energy(double beta) const;
  /// Average of S(sigma_A).
  double entropy(double beta) const;
  /// Average block variance tr(H_A^2)/d_A.
  double mean_block_variance() const;

  /// Limits of energy(beta) for beta -> +inf and -inf.
  double min_energy() const { return min_energy_; }
  double max_energy() const { return max_energy_; }
  /// Bracket limit from the overflow cap.
  double beta_limit() const { return beta_limit_; }

 private:
  void prepare();

  std::vector<std::vector<double>> spectra_;
  std::size_t length_;
  std::size_t local_dim_;
  double min_energy_ = 0.0;
  double max_energy_ = 0.0;
  double beta_limit_ = 0.0;
};

struct ThermoCurve {
  std::vector<double> betas;
  std::vector<double> energy;
  std::vector<double> entropy;
  std::size_t subsystem_length = 0;
  std::size_t term_count = 0;
};

/// Throws InvariantError unless E(0) = 0, S(0) = L ln d, E decreases and S
/// peaks at beta = 0 along the grid.
void validate_curve(const ThermoCurve& curve, double max_entropy);

ThermoCurve energy_entropy_curves(const ThermoModel& model, std::span<const double> betas);
ThermoCurve energy_entropy_curves(const LocalHamiltonian& h, std::size_t subsystem_length,
                                  std::span<const double> betas);

/// Root of energy(beta) = target by bracketing bisection. Throws
/// std::domain_error if the target is outside the attainable range.
double solve_effective_beta(const ThermoModel& model, double target);

struct ThermoBoundReport {
  double lhs = 0.0;        // average entropy of the reduced states
  double rhs = 0.0;        // S(beta*)
  double beta_star = 0.0;
  double target = 0.0;     // (L-1) tr(rho H) / N
  double max_entropy = 0.0;
  bool holds = false;
};

/// Eigenstate j of sd. Throws InvariantError if lhs > rhs + 1e-8.
ThermoBoundReport thermo_bound_report(const ThermoModel& model, const SpectralData& sd,
                                      std::size_t state_index);
/// General state rho on the full chain.
ThermoBoundReport thermo_bound_report(const ThermoModel& model, const LocalHamiltonian& h,
                                      const DensityMatrix& rho);

struct ExpansionReport {
  std::size_t points = 0;
  double fitted_slope = 0.0;
  double expected_slope = 0.0;
  double slope_rel_error = 0.0;
  double fitted_quadratic = 0.0;
  double expected_quadratic = 0.0;
  double quadratic_rel_error = 0.0;
  bool slope_ok = false;      // within 1%
  bool quadratic_ok = false;  // within 5%
};

/// Small-beta fits E ~ c1 beta and L ln d - S ~ c2 beta^2 over the grid points
/// with |beta| <= 0.02 min(1, 1/sqrt(L)), compared with c1 = -s2_a and
/// c2 = s2_a / 2, where s2_a is the mean block variance.
ExpansionReport expansion_check(const ThermoCurve& curve, double s2_a, std::size_t local_dim);
/// Same with s2_a = (L-1) s2 / N.
ExpansionReport expansion_check(const ThermoCurve& curve, double s2, std::size_t n_sites,
                                std::size_t local_dim);

/// Symmetric grid: `count` points on each side of 0 up to the small-beta
/// limit, plus 0 itself.
std::vector<double> small_beta_grid(std::size_t subsystem_length, std::size_t count);

}  // namespace midspec
