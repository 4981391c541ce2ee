#include "midspec/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "midspec/basis.hpp"
#include "midspec/errors.hpp"

namespace midspec {
namespace {

struct BlockThermo {
  double energy;
  double entropy;
};

BlockThermo block_thermo(const std::vector<double>& spectrum, double beta) {
  double shift = -std::numeric_limits<double>::infinity();
  for (double l : spectrum) shift = std::max(shift, -beta * l);
  std::vector<double> w(spectrum.size());
  std::vector<double> wl(spectrum.size());
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    w[k] = std::exp(-beta * spectrum[k] - shift);
    wl[k] = w[k] * spectrum[k];
  }
  const double z = pairwise_sum(w);
  const double e = pairwise_sum(wl) / z;
  // -sum p ln p with ln p_k = -beta lambda_k - shift - ln z.
  return {e, beta * e + shift + std::log(z)};
}

double spread(const std::vector<double>& spectrum) {
  auto [lo, hi] = std::minmax_element(spectrum.begin(), spectrum.end());
  return *hi - *lo;
}

double block_mean(std::size_t count, const std::function<double(std::size_t)>& f) {
  std::vector<double> v(count);
  for (std::size_t b = 0; b < count; ++b) v[b] = f(b);
  return pairwise_sum(v) / static_cast<double>(count);
}

}  // namespace

DensityMatrix thermal_state(const ComplexMatrix& h_a, double beta) {
  if (!std::isfinite(beta)) throw std::invalid_argument("thermal_state: beta must be finite");
  const EigenDecomposition eig = hermitian_eig(h_a);
  if (eig.eigenvalues.empty()) throw std::invalid_argument("thermal_state: empty Hamiltonian");
  const double width = spread(eig.eigenvalues);
  if (std::abs(beta) * width > kBetaSpreadCap) {
    std::ostringstream msg;
    msg << "thermal_state: |beta| * spread = " << std::abs(beta) * width << " exceeds "
        << kBetaSpreadCap;
    throw std::invalid_argument(msg.str());
  }
  double shift = -std::numeric_limits<double>::infinity();
  for (double l : eig.eigenvalues) shift = std::max(shift, -beta * l);
  std::vector<double> w(eig.eigenvalues.size());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = std::exp(-beta * eig.eigenvalues[k] - shift);
  const double z = pairwise_sum(w);
  ComplexMatrix rho =
      matrix_function(eig, [&](double l) { return std::exp(-beta * l - shift) / z; });
  return DensityMatrix(std::move(rho), "thermal");
}

ThermoModel::ThermoModel(const LocalHamiltonian& h, std::size_t subsystem_length)
    : length_(subsystem_length), local_dim_(h.local_dim()) {
  if (h.boundary() != Boundary::kPeriodic) {
    throw std::invalid_argument("ThermoModel: block averages need a periodic chain");
  }
  if (subsystem_length < 2 || subsystem_length >= h.n_sites()) {
    throw std::invalid_argument("ThermoModel: block length must satisfy 2 <= L < N");
  }
  spectra_.reserve(h.n_sites());
  for (std::size_t s = 0; s < h.n_sites(); ++s) {
    spectra_.push_back(hermitian_eigenvalues(subsystem_hamiltonian(h, {s, subsystem_length})));
  }
  prepare();
}

ThermoModel::ThermoModel(std::vector<std::vector<double>> block_spectra,
                         std::size_t subsystem_length, std::size_t local_dim)
    : spectra_(std::move(block_spectra)), length_(subsystem_length), local_dim_(local_dim) {
  if (spectra_.empty()) throw std::invalid_argument("ThermoModel: no blocks");
  if (local_dim < 2 || subsystem_length < 1) {
    throw std::invalid_argument("ThermoModel: need local_dim >= 2 and L >= 1");
  }
  const std::size_t d_a = ipow(local_dim, subsystem_length);
  for (const auto& s : spectra_) {
    if (s.size() != d_a) throw std::invalid_argument("ThermoModel: block spectrum has wrong size");
  }
  prepare();
}

void ThermoModel::prepare() {
  double widest = 0.0;
  for (const auto& s : spectra_) widest = std::max(widest, spread(s));
  if (!(widest > 0.0)) throw std::invalid_argument("ThermoModel: every block Hamiltonian is trivial");
  beta_limit_ = kBetaSpreadCap / widest;
  min_energy_ = block_mean(spectra_.size(), [&](std::size_t b) {
    return *std::min_element(spectra_[b].begin(), spectra_[b].end());
  });
  max_energy_ = block_mean(spectra_.size(), [&](std::size_t b) {
    return *std::max_element(spectra_[b].begin(), spectra_[b].end());
  });
}

double ThermoModel::max_entropy() const {
  return static_cast<double>(length_) * std::log(static_cast<double>(local_dim_));
}

double ThermoModel::energy(double beta) const {
  return block_mean(spectra_.size(), [&](std::size_t b) { return block_thermo(spectra_[b], beta).energy; });
}

double ThermoModel::entropy(double beta) const {
  return block_mean(spectra_.size(), [&](std::size_t b) { return block_thermo(spectra_[b], beta).entropy; });
}

double ThermoModel::mean_block_variance() const {
  return block_mean(spectra_.size(), [&](std::size_t b) {
    std::vector<double> sq(spectra_[b].size());
    for (std::size_t k = 0; k < sq.size(); ++k) sq[k] = spectra_[b][k] * spectra_[b][k];
    return pairwise_sum(sq) / static_cast<double>(sq.size());
  });
}

void validate_curve(const ThermoCurve& curve, double max_entropy) {
  const auto& b = curve.betas;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double e = curve.energy[i];
    const double s = curve.entropy[i];
    if (b[i] == 0.0) {
      if (std::abs(e) > 1e-9) throw InvariantError("thermo curve: E(0) = " + std::to_string(e));
      if (std::abs(s - max_entropy) > 1e-9) {
        throw InvariantError("thermo curve: S(0) differs from L ln d");
      }
    }
    if (s > max_entropy + 1e-9) throw InvariantError("thermo curve: S exceeds L ln d");
    if (i == 0) continue;
    const double e_slack = 1e-12 * (1.0 + std::abs(e));
    const double s_slack = 1e-12 * (1.0 + std::abs(s));
    if (e > curve.energy[i - 1] + e_slack) {
      std::ostringstream msg;
      msg << "thermo curve: E increases between beta = " << b[i - 1] << " and " << b[i];
      throw InvariantError(msg.str());
    }
    if (b[i - 1] >= 0.0 && s > curve.entropy[i - 1] + s_slack) {
      throw InvariantError("thermo curve: S increases for beta > 0");
    }
    if (b[i] <= 0.0 && s < curve.entropy[i - 1] - s_slack) {
      throw InvariantError("thermo curve: S decreases for beta < 0");
    }
  }
}

ThermoCurve energy_entropy_curves(const ThermoModel& model, std::span<const double> betas) {
  if (betas.empty()) throw std::invalid_argument("energy_entropy_curves: empty beta grid");
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (!std::isfinite(betas[i]) || (i > 0 && !(betas[i] > betas[i - 1]))) {
      throw std::invalid_argument("energy_entropy_curves: beta grid must be finite and increasing");
    }
    if (std::abs(betas[i]) > model.beta_limit()) {
      std::ostringstream msg;
      msg << "energy_entropy_curves: |beta| = " << std::abs(betas[i]) << " exceeds the overflow cap "
          << model.beta_limit();
      throw std::invalid_argument(msg.str());
    }
  }
  ThermoCurve c;
  c.betas.assign(betas.begin(), betas.end());
  c.subsystem_length = model.subsystem_length();
  c.term_count = model.subsystem_length() - 1;
  for (double b : betas) {
    c.energy.push_back(model.energy(b));
    c.entropy.push_back(model.entropy(b));
  }
  validate_curve(c, model.max_entropy());
  return c;
}

ThermoCurve energy_entropy_curves(const LocalHamiltonian& h, std::size_t subsystem_length,
                                  std::span<const double> betas) {
  return energy_entropy_curves(ThermoModel(h, subsystem_length), betas);
}

double solve_effective_beta(const ThermoModel& model, double target) {
  const auto out_of_range = [&](double lo, double hi) {
    std::ostringstream msg;
    msg << "solve_effective_beta: target " << target << " outside attainable range (" << lo
        << ", " << hi << ")";
    return std::domain_error(msg.str());
  };
  if (!std::isfinite(target)) throw std::invalid_argument("solve_effective_beta: target must be finite");
  if (!(target > model.min_energy() && target < model.max_energy())) {
    throw out_of_range(model.min_energy(), model.max_energy());
  }
  const double limit = model.beta_limit();
  double hi = std::min(1.0, limit);
  while (model.energy(hi) > target && hi < limit) hi = std::min(2.0 * hi, limit);
  double lo = -std::min(1.0, limit);
  while (model.energy(lo) < target && -lo < limit) lo = std::max(2.0 * lo, -limit);
  if (model.energy(hi) > target || model.energy(lo) < target) {
    throw out_of_range(model.energy(limit), model.energy(-limit));
  }
  // E is decreasing: E(lo) >= target >= E(hi).
  for (int it = 0; it < 64; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (model.energy(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double r_lo = std::abs(model.energy(lo) - target);
  const double r_hi = std::abs(model.energy(hi) - target);
  const double beta = r_lo < r_hi ? lo : hi;
  if (std::min(r_lo, r_hi) > 1e-10 * (1.0 + std::abs(target))) {
    std::ostringstream msg;
    msg << "solve_effective_beta: residual " << std::min(r_lo, r_hi) << " at beta = " << beta;
    throw InvariantError(msg.str());
  }
  return beta;
}

namespace {

ThermoBoundReport finish_bound(const ThermoModel& model, std::vector<double> entropies,
                               double energy, std::size_t n_sites) {
  ThermoBoundReport r;
  r.lhs = pairwise_sum(entropies) / static_cast<double>(entropies.size());
  r.target = static_cast<double>(model.subsystem_length() - 1) * energy /
             static_cast<double>(n_sites);
  r.beta_star = solve_effective_beta(model, r.target);
  r.rhs = model.entropy(r.beta_star);
  r.max_entropy = model.max_entropy();
  r.holds = r.lhs <= r.rhs + 1e-8;
  if (!r.holds) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "thermo bound violated: average entropy " << r.lhs << " > S(beta*) " << r.rhs;
    throw InvariantError(msg.str());
  }
  return r;
}

void require_matching_model(const ThermoModel& model, std::size_t n_sites, std::size_t d) {
  if (model.block_count() != n_sites || model.local_dim() != d) {
    throw std::invalid_argument("thermo_bound_report: model was built for a different chain");
  }
}

}  // namespace

ThermoBoundReport thermo_bound_report(const ThermoModel& model, const SpectralData& sd,
                                      std::size_t state_index) {
  require_matching_model(model, sd.n_sites, sd.local_dim);
  if (state_index >= sd.dim()) throw std::invalid_argument("thermo_bound_report: no such eigenstate");
  const auto psi = sd.eigenvector(state_index);
  std::vector<double> entropies(sd.n_sites);
  for (std::size_t s = 0; s < sd.n_sites; ++s) {
    entropies[s] = entanglement_entropy(psi, sd.n_sites, sd.local_dim, {s, model.subsystem_length()});
  }
  return finish_bound(model, std::move(entropies), sd.eigenvalues[state_index], sd.n_sites);
}

ThermoBoundReport thermo_bound_report(const ThermoModel& model, const LocalHamiltonian& h,
                                      const DensityMatrix& rho) {
  require_matching_model(model, h.n_sites(), h.local_dim());
  std::vector<double> entropies(h.n_sites());
  for (std::size_t s = 0; s < h.n_sites(); ++s) {
    entropies[s] = von_neumann_entropy(
        partial_trace(rho, h.n_sites(), h.local_dim(), {s, model.subsystem_length()}));
  }
  return finish_bound(model, std::move(entropies), energy_expectation(h, rho.matrix()), h.n_sites());
}

double small_beta_limit(std::size_t subsystem_length) {
  return 0.02 * std::min(1.0, 1.0 / std::sqrt(static_cast<double>(subsystem_length)));
}

std::vector<double> small_beta_grid(std::size_t subsystem_length, std::size_t count) {
  if (count == 0) throw std::invalid_argument("small_beta_grid: count must be positive");
  const double top = small_beta_limit(subsystem_length);
  std::vector<double> grid;
  for (std::size_t k = count; k >= 1; --k) grid.push_back(-top * static_cast<double>(k) / static_cast<double>(count));
  grid.push_back(0.0);
  for (std::size_t k = 1; k <= count; ++k) grid.push_back(top * static_cast<double>(k) / static_cast<double>(count));
  return grid;
}

ExpansionReport expansion_check(const ThermoCurve& curve, double s2_a, std::size_t local_dim) {
  const double limit = small_beta_limit(curve.subsystem_length) * (1.0 + 1e-12);
  const double max_s = static_cast<double>(curve.subsystem_length) *
                       std::log(static_cast<double>(local_dim));
  double sxx = 0.0, sxe = 0.0, s4 = 0.0, s2d = 0.0;
  bool below = false, above = false;
  ExpansionReport r;
  for (std::size_t i = 0; i < curve.betas.size(); ++i) {
    const double b = curve.betas[i];
    if (b == 0.0 || std::abs(b) > limit) continue;
    below |= b < 0.0;
    above |= b > 0.0;
    ++r.points;
    sxx += b * b;
    sxe += b * curve.energy[i];
    s4 += b * b * b * b;
    s2d += b * b * (max_s - curve.entropy[i]);
  }
  if (!below || !above) {
    throw std::invalid_argument("expansion_check: grid needs small nonzero betas on both sides of 0");
  }
  r.fitted_slope = sxe / sxx;
  r.expected_slope = -s2_a;
  r.slope_rel_error = std::abs(r.fitted_slope - r.expected_slope) / std::abs(r.expected_slope);
  r.fitted_quadratic = s2d / s4;
  r.expected_quadratic = 0.5 * s2_a;
  r.quadratic_rel_error =
      std::abs(r.fitted_quadratic - r.expected_quadratic) / std::abs(r.expected_quadratic);
  r.slope_ok = r.slope_rel_error <= 0.01;
  r.quadratic_ok = r.quadratic_rel_error <= 0.05;
  return r;
}

ExpansionReport expansion_check(const ThermoCurve& curve, double s2, std::size_t n_sites,
                                std::size_t local_dim) {
  if (n_sites == 0) throw std::invalid_argument("expansion_check: n_sites must be positive");
  const double s2_a = static_cast<double>(curve.term_count) * s2 / static_cast<double>(n_sites);
  return expansion_check(curve, s2_a, local_dim);
}

}  // namespace midspec
